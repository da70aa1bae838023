#include "cli.hpp"

#include <CLI11.hpp>
#include <ostream>

#include "commands.hpp"
#include "config.hpp"
#include "expint/errors.hpp"

namespace expint::cli {

bool failure_injection_enabled() noexcept {
#ifdef EXPINT_FAILURE_INJECTION
    return true;
#else
    return false;
#endif
}

namespace {

/// Values from --config fill every option the command line left unset.
void apply_config(CLI::App& sub, const std::string& path) {
    for (const auto& e : read_flat_config(path)) {
        CLI::Option* opt = sub.get_option_no_throw("--" + e.key);
        if (opt == nullptr || e.key == "config" || e.key == "help") {
            throw ConfigError(path + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "' for " +
                              sub.get_name());
        }
        if (opt->count() > 0) continue;
        opt->clear();
        opt->add_result(e.value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& ex) {
            throw ConfigError(path + ":" + std::to_string(e.line) + ": " + ex.what());
        }
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exponential integrators on stencil and sparse operators", "expint"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    BenchOptions bo;
    auto* bench = app.add_subcommand("bench", "Time operator kernels and report Gflops/s");
    bench->add_option("--grid", bo.grid, "N or NX,NY,NZ")->capture_default_str();
    bench->add_option("--precision", bo.precision, "f32,f64,c128")->delimiter(',')->capture_default_str();
    bench->add_option("--method", bo.method, "naive,tiled")->delimiter(',')->capture_default_str();
    bench->add_option("--kernel", bo.kernel, "stencil,stencil_coeff,stencil_split,csr,nonlinearity,dummy")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--boundary", bo.boundary, "none, homogeneous, or an expression in x,y,z")
        ->capture_default_str();
    bench->add_option("--tile", bo.tile, "tile extent TX,TY")->capture_default_str();
    bench->add_option("--repetitions", bo.repetitions)->capture_default_str();
    bench->add_option("--warmup", bo.warmup)->capture_default_str();
    bench->add_option("--workers", bo.workers)->capture_default_str();
    bench->add_option("--seed", bo.seed)->capture_default_str();
    bench->add_option("--device", bo.device)->capture_default_str();
    bench->add_option("--out", bo.out, "CSV (or JSON with --json) destination; stdout if omitted");
    bench->add_flag("--json", bo.json, "Emit JSON instead of CSV");

    CombustionOptions co;
    auto* solve = app.add_subcommand("solve-combustion", "Exponential Euler on the combustion model");
    solve->add_option("--grid", co.grid)->capture_default_str();
    solve->add_option("--precision", co.precision, "f32 or f64")->capture_default_str();
    solve->add_option("--method", co.method, "naive or tiled")->capture_default_str();
    solve->add_option("--boundary", co.boundary)->capture_default_str();
    solve->add_option("--u0", co.u0, "initial value, an expression in x,y,z")->capture_default_str();
    solve->add_option("--h", co.h)->capture_default_str();
    solve->add_option("--t-end", co.t_end, "final time; defaults to one step");
    solve->add_option("--tol", co.tol)->capture_default_str();
    solve->add_option("--max-degree", co.max_degree)->capture_default_str();
    solve->add_option("--workers", co.workers)->capture_default_str();
    solve->add_option("--out", co.out, "final field (.csv for text, binary otherwise)");
    solve->add_option("--steps", co.steps, "per-step CSV");
    solve->add_option("--ledger", co.ledger, "transfer ledger CSV");
    solve->add_flag("--json", co.json, "Print the summary as JSON");

    PropagateOptions po;
    auto* prop = app.add_subcommand("propagate", "psi(t) = exp(-i H t) psi0 for a sparse Hermitian H");
    prop->add_option("--matrix", po.matrix, "Matrix Market file");
    prop->add_option("--psi0", po.psi0, "initial vector, one 're [im]' per line; e_0 if omitted");
    prop->add_option("--t-end", po.t_end)->capture_default_str();
    prop->add_option("--h", po.h, "step length; defaults to t-end");
    prop->add_option("--tol", po.tol)->capture_default_str();
    prop->add_option("--max-degree", po.max_degree)->capture_default_str();
    prop->add_option("--workers", po.workers)->capture_default_str();
    prop->add_flag("--hermitian,!--no-hermitian", po.hermitian,
                   "Propagate with -iH (default); otherwise exp(-tA) with A as given");
    prop->add_option("--out", po.out);
    prop->add_option("--ledger", po.ledger, "transfer ledger CSV");
    prop->add_flag("--json", po.json, "Print the summary as JSON");

    VerifyOptions vo;
    auto* verify = app.add_subcommand("verify", "Run the built-in oracle and convergence checks");
    verify->add_option("--only", vo.only, "stencil,leja,partition,order")->delimiter(',');
    if (failure_injection_enabled()) {
        verify->add_option("--inject-failure", vo.inject_failure, "force the named suite to fail");
    }
    verify->add_flag("--json", vo.json, "Print results as JSON");

    std::vector<std::string> config_paths(4);
    for (auto [sub, i] : {std::pair{bench, 0}, std::pair{solve, 1}, std::pair{prop, 2}, std::pair{verify, 3}}) {
        sub->add_option("--config", config_paths[static_cast<std::size_t>(i)], "flat key = value file; flags win");
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (bench->parsed()) {
            if (!config_paths[0].empty()) apply_config(*bench, config_paths[0]);
            return cmd_bench(bo, out, err);
        }
        if (solve->parsed()) {
            if (!config_paths[1].empty()) apply_config(*solve, config_paths[1]);
            return cmd_solve_combustion(co, out, err);
        }
        if (prop->parsed()) {
            if (!config_paths[2].empty()) apply_config(*prop, config_paths[2]);
            return cmd_propagate(po, out, err);
        }
        if (!config_paths[3].empty()) apply_config(*verify, config_paths[3]);
        return cmd_verify(vo, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}

} // namespace expint::cli
