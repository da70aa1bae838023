#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "expint/bench.hpp"
#include "expint/decomp.hpp"
#include "expint/errors.hpp"
#include "expint/integrator.hpp"
#include "expint/matrix_market.hpp"
#include "expression.hpp"

namespace expint::cli {

namespace {

ScalarFunction compile(const std::string& what, const std::string& text) {
    try {
        return parse_expression(text);
    } catch (const ParseError& e) {
        throw ConfigError(what + " '" + text + "': " + e.what());
    }
}

bool is_builtin_boundary(const std::string& s) {
    return s == "none" || s == "periodic" || s == "homogeneous";
}

Grid3D make_grid(const std::string& s) {
    const auto g = parse_grid(s);
    return Grid3D(g[0], g[1], g[2]);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    return os;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// -- solve-combustion -------------------------------------------------------

template <class T>
int solve_combustion(const CombustionOptions& o, const Grid3D& g, const BoundaryCondition& bc,
                     const ScalarFunction& u0fn, std::ostream& out) {
    StencilOperator<T> op{g};
    op.bc = bc;
    op.traversal = parse_traversal(o.method);

    SemilinearProblem<T> p;
    const bool affine = !bc.is_linear();
    const StencilOperator<T> lin = affine ? homogeneous_part(op) : op;
    std::shared_ptr<TransferLedger> ledger;
    if (o.workers > 1) {
        ledger = std::make_shared<TransferLedger>();
        p.A = std::make_shared<PartitionedStencil<T>>(lin, o.workers, ledger);
    } else {
        p.A = std::make_shared<StencilLinearOperator<T>>(lin);
    }
    if (affine) p.boundary_source = boundary_source(op).values();
    p.g = make_nonlinearity<T>("combustion");
    p.u0 = eval_on_grid<T>(g, u0fn).values();

    StepperConfig cfg;
    cfg.h = o.h;
    cfg.t_end = o.t_end > 0.0 ? o.t_end : o.h;
    cfg.tol = o.tol;
    cfg.max_degree = static_cast<std::size_t>(o.max_degree);

    std::ofstream steps;
    if (!o.steps.empty()) {
        steps = open_out(o.steps);
        steps << "step,t,matvecs,max_norm\n";
    }
    std::size_t total = 0, nsteps = 0;
    const auto u = integrate(p, cfg, [&](const StepInfo& s) {
        total += s.matvecs;
        nsteps = s.step;
        if (steps.is_open()) steps << s.step << ',' << fmt(s.t) << ',' << s.matvecs << ',' << fmt(s.max_norm) << '\n';
    });

    if (!o.out.empty()) {
        const Field<T> f(g, u);
        if (o.out.size() >= 4 && o.out.substr(o.out.size() - 4) == ".csv") write_field_csv(f, o.out);
        else write_field_binary(f, o.out);
    }
    if (ledger && !o.ledger.empty()) ledger->write_csv(o.ledger);

    const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
    const std::uint64_t moved = ledger ? ledger->total_scalars() : 0;
    if (o.json) {
        nlohmann::json j{{"command", "solve-combustion"},
                         {"grid", {g.nx(), g.ny(), g.nz()}},
                         {"precision", o.precision},
                         {"workers", o.workers},
                         {"steps", nsteps},
                         {"t_end", cfg.t_end},
                         {"matvecs", total},
                         {"min", static_cast<double>(*mn)},
                         {"max", static_cast<double>(*mx)},
                         {"ledger_scalars", moved}};
        out << j.dump(2) << '\n';
    } else {
        out << "steps " << nsteps << "  t_end " << cfg.t_end << "  matvecs " << total << "  min " << *mn << "  max "
            << *mx;
        if (ledger) out << "  halo_scalars " << moved;
        out << '\n';
    }
    return exit_ok;
}

// -- propagate ---------------------------------------------------------------

using cplx = std::complex<double>;

std::vector<cplx> read_vector(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    std::vector<cplx> v;
    std::string line;
    for (std::size_t n = 1; std::getline(is, line); ++n) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
        std::istringstream ls(line);
        double re = 0.0, im = 0.0;
        if (!(ls >> re)) throw ParseError("expected a number", n);
        if (!(ls >> im)) im = 0.0;
        v.emplace_back(re, im);
    }
    return v;
}

void write_vector(const std::vector<cplx>& v, const std::string& path) {
    auto os = open_out(path);
    os << std::setprecision(17);
    for (const auto& z : v) os << z.real() << ' ' << z.imag() << '\n';
    if (!os) throw Error("write failed for " + path);
}

} // namespace

BoundaryCondition parse_boundary(const std::string& s) {
    if (s == "none" || s == "periodic") return BoundaryCondition::periodic();
    if (s == "homogeneous") return BoundaryCondition::homogeneous();
    return BoundaryCondition::function(compile("boundary expression", s), s);
}

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
    BenchSpec base;
    base.grid = parse_grid(o.grid);
    base.repetitions = o.repetitions;
    base.warmup = o.warmup;
    base.workers = o.workers;
    base.seed = o.seed;
    base.device = o.device;
    base.boundary = o.boundary == "periodic" ? "none" : o.boundary;
    if (!is_builtin_boundary(o.boundary)) base.boundary_fn = compile("boundary expression", o.boundary);
    const auto tile = split_list(o.tile);
    if (tile.size() != 2) throw ConfigError("tile must be TX,TY");
    base.tile = {std::stoi(tile[0]), std::stoi(tile[1])};

    std::vector<BenchSpec> specs;
    for (const auto& k : o.kernel) {
        for (const auto& p : o.precision) {
            const bool traversal_matters = k.rfind("stencil", 0) == 0;
            for (std::size_t m = 0; m < (traversal_matters ? o.method.size() : 1); ++m) {
                BenchSpec s = base;
                s.kernel = k;
                s.precision = parse_scalar_kind(p);
                s.traversal = parse_traversal(traversal_matters ? o.method[m] : "naive");
                s.validate();
                specs.push_back(std::move(s));
            }
        }
    }

    std::vector<BenchResult> results;
    for (const auto& s : specs) {
        results.push_back(run_bench(s));
        const auto& r = results.back();
        err << r.spec.kernel << ' ' << to_string(r.spec.precision) << ' ' << r.method() << ": median "
            << r.median_s * 1e3 << " ms, " << r.gflops << " Gflops/s\n";
    }
    if (o.out.empty()) {
        if (o.json) report_json(results, out);
        else report_csv(results, out);
    } else {
        auto os = open_out(o.out);
        if (o.json) report_json(results, os);
        else report_csv(results, os);
        if (!os) throw Error("write failed for " + o.out);
        out << "wrote " << results.size() << " rows to " << o.out << '\n';
    }
    return exit_ok;
}

int cmd_solve_combustion(const CombustionOptions& o, std::ostream& out, std::ostream&) {
    const Grid3D g = make_grid(o.grid);
    if (o.workers < 1) throw ConfigError("workers must be at least 1");
    if (o.max_degree < 1) throw ConfigError("max-degree must be positive");
    if (o.boundary == "none" || o.boundary == "periodic") {
        throw ConfigError("the combustion model needs Dirichlet data; use homogeneous or an expression");
    }
    StepperConfig check;
    check.h = o.h;
    check.t_end = o.t_end > 0.0 ? o.t_end : o.h;
    check.tol = o.tol;
    check.validate();
    const BoundaryCondition bc = parse_boundary(o.boundary);
    const ScalarFunction u0 = compile("initial value", o.u0);
    parse_traversal(o.method);
    const ScalarKind kind = parse_scalar_kind(o.precision);
    if (kind == ScalarKind::f32) return solve_combustion<float>(o, g, bc, u0, out);
    if (kind == ScalarKind::f64) return solve_combustion<double>(o, g, bc, u0, out);
    throw ConfigError("solve-combustion supports f32 and f64");
}

int cmd_propagate(const PropagateOptions& o, std::ostream& out, std::ostream&) {
    if (o.matrix.empty()) throw ConfigError("--matrix is required");
    if (!(o.t_end > 0.0) || !(o.tol > 0.0) || o.h < 0.0) throw ConfigError("t-end and tol must be positive");
    if (o.workers < 1) throw ConfigError("workers must be at least 1");
    const double h = o.h > 0.0 ? std::min(o.h, o.t_end) : o.t_end;

    auto H = read_matrix_market<cplx>(o.matrix);
    if (!H.square()) throw DimensionError("propagation needs a square matrix");
    const std::size_t n = H.nrows();
    std::vector<cplx> psi = o.psi0.empty() ? std::vector<cplx>(n) : read_vector(o.psi0);
    if (o.psi0.empty()) psi[0] = 1.0;
    if (psi.size() != n) {
        throw DimensionError("initial vector has " + std::to_string(psi.size()) + " entries, matrix is " +
                             std::to_string(n) + "x" + std::to_string(n));
    }

    std::shared_ptr<const CsrMatrix<cplx>> A;
    if (o.hermitian) {
        if (!is_hermitian(H)) throw DomainError("matrix is not Hermitian; pass --no-hermitian", 0);
        std::vector<cplx> vals(H.values().begin(), H.values().end());
        for (auto& v : vals) v *= cplx(0.0, 1.0);
        A = std::make_shared<const CsrMatrix<cplx>>(
            n, n, std::vector<int>(H.row_ptr().begin(), H.row_ptr().end()),
            std::vector<int>(H.col_idx().begin(), H.col_idx().end()), std::move(vals));
    } else {
        A = std::make_shared<const CsrMatrix<cplx>>(std::move(H));
    }

    auto ledger = std::make_shared<TransferLedger>();
    std::unique_ptr<LinearOperator<cplx>> op;
    if (o.workers > 1) op = std::make_unique<PartitionedCsr<cplx>>(A, o.workers, ledger);
    else op = std::make_unique<CsrLinearOperator<cplx>>(A);
    const SpectralInterval iv = op->spectral_interval();

    MatFuncOptions opt;
    opt.tol = o.tol;
    opt.max_degree = static_cast<std::size_t>(o.max_degree);
    const double norm0 = detail::norm2<cplx>(psi);
    std::size_t matvecs = 0, steps = 0;
    double t = 0.0;
    while (t < o.t_end * (1.0 - 1e-12)) {
        const double dt = std::min(h, o.t_end - t);
        auto r = expmv<cplx>(*op, iv, dt, psi, opt);
        psi = std::move(r.y);
        matvecs += r.matvecs;
        t += dt;
        ++steps;
    }
    const double drift = std::abs(detail::norm2<cplx>(psi) - norm0);

    if (!o.out.empty()) write_vector(psi, o.out);
    if (!o.ledger.empty()) ledger->write_csv(o.ledger);
    if (o.json) {
        nlohmann::json j{{"command", "propagate"}, {"n", n},           {"nnz", A->nnz()},
                         {"t_end", o.t_end},       {"steps", steps},   {"matvecs", matvecs},
                         {"norm_drift", drift},    {"workers", o.workers},
                         {"ledger_scalars", ledger->total_scalars()}};
        out << j.dump(2) << '\n';
    } else {
        out << "n " << n << "  nnz " << A->nnz() << "  steps " << steps << "  matvecs " << matvecs
            << "  ledger_scalars " << ledger->total_scalars() << "  norm_drift " << fmt(drift) << '\n';
    }
    return exit_ok;
}

} // namespace expint::cli
