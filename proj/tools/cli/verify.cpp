#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "commands.hpp"
#include "expint/decomp.hpp"
#include "expint/errors.hpp"
#include "expint/integrator.hpp"
#include "expint/sparse.hpp"

namespace expint::cli {

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(3) << v;
    return os.str();
}

// Matrix-free apply against the assembled CSR form over all operator variants.
VerifyOutcome verify_stencil() {
    const std::vector<Grid3D> grids{Grid3D::cube(5), Grid3D::cube(9), Grid3D(7, 5, 3)};
    const std::vector<BoundaryCondition> bcs{
        BoundaryCondition::homogeneous(), BoundaryCondition::periodic(),
        BoundaryCondition::function([](double x, double y, double z) { return z * (1 - z) * x * y; }, "z(1-z)xy"),
        BoundaryCondition::function(
            [](double x, double y, double z) { return std::sin(std::numbers::pi * z) * std::exp(-x * y); },
            "sin(pi z)exp(-xy)")};
    double worst = 0.0;
    for (const auto& g : grids) {
        const auto u = random_vector(g.size(), 11);
        for (const auto& bc : bcs) {
            for (bool coeff : {false, true}) {
                for (Traversal t : {Traversal::naive, Traversal::tiled}) {
                    StencilOperator<double> op{g};
                    op.bc = bc;
                    if (coeff) op.coeff = inverse_radial_diffusion();
                    op.traversal = t;
                    op.tile = {3, 2};
                    const auto y = apply(op, Field<double>(g, u));
                    const auto [A, b] = assemble_stencil(op);
                    auto ref = spmv(A, u);
                    double scale = 0.0, diff = 0.0;
                    for (std::size_t i = 0; i < ref.size(); ++i) {
                        ref[i] += b[i];
                        scale = std::max(scale, std::abs(ref[i]));
                        diff = std::max(diff, std::abs(y[i] - ref[i]));
                    }
                    worst = std::max(worst, diff / std::max(scale, 1e-300));
                }
            }
        }
    }
    return {"stencil", worst <= 1e-13, "max relative error " + sci(worst) + " (limit 1e-13)"};
}

// exp(-hA)v and phi1(-hA)v against the closed-form eigendecomposition of a
// scaled 1D second difference with spectrum inside [0, 50].
VerifyOutcome verify_leja() {
    const std::size_t n = 63;
    const double c = 12.5;
    std::vector<Triplet<double>> tr;
    for (std::size_t i = 0; i < n; ++i) {
        const int r = static_cast<int>(i);
        tr.push_back({r, r, 2 * c});
        if (i > 0) tr.push_back({r, r - 1, -c});
        if (i + 1 < n) tr.push_back({r, r + 1, -c});
    }
    const CsrLinearOperator<double> A(CsrMatrix<double>::from_triplets(n, n, tr));
    const auto v = random_vector(n, 12);
    const double w = std::numbers::pi / static_cast<double>(n + 1);
    std::vector<double> lambda(n), coef(n);
    for (std::size_t k = 0; k < n; ++k) {
        lambda[k] = c * (2.0 - 2.0 * std::cos(static_cast<double>(k + 1) * w));
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += v[j] * std::sin(static_cast<double>((j + 1) * (k + 1)) * w);
        coef[k] = 2.0 / static_cast<double>(n + 1) * s;
    }
    const double tol = 1e-10;
    double worst = 0.0;
    for (double h : {1e-3, 1e-2, 1e-1}) {
        for (Target target : {Target::exp, Target::phi1}) {
            MatFuncOptions opt;
            opt.tol = tol;
            const auto r = apply_target<double>(target, A, A.spectral_interval(), h, v, opt);
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double exact = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double z = -h * lambda[k];
                    const double f = target == Target::exp ? std::exp(z) : std::expm1(z) / z;
                    exact += coef[k] * f * std::sin(static_cast<double>((j + 1) * (k + 1)) * w);
                }
                num += (r.y[j] - exact) * (r.y[j] - exact);
                den += exact * exact;
            }
            worst = std::max(worst, std::sqrt(num / den));
        }
    }
    const double limit = std::max(1e-8, 10 * tol);
    return {"leja", worst <= limit, "max relative 2-norm error " + sci(worst) + " (limit " + sci(limit) + ")"};
}

// Bitwise agreement of partitioned runs on 17^3 for m = 1..4.
VerifyOutcome verify_partition() {
    const Grid3D g = Grid3D::cube(17);
    const StencilOperator<double> op{g};
    const auto x = random_vector(g.size(), 13);
    std::vector<double> u0(g.size());
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = 1.0 + 0.25 * std::sin(0.01 * static_cast<double>(i));
    const auto ip = LejaInterpolant::build(gershgorin_interval(op), Target::exp, 1e-3, 150, 1e-8);

    std::vector<double> ref_apply, ref_newton, ref_step;
    int mismatches = 0;
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
    };
    for (int m = 1; m <= 4; ++m) {
        auto P = std::make_shared<PartitionedStencil<double>>(op, m);
        std::vector<double> y(g.size());
        P->fused_apply(0.5, 2.0, x, y);
        const auto newton = newton_apply<double>(*P, ip, x, 1e-8).y;
        SemilinearProblem<double> p;
        p.A = P;
        p.g = make_nonlinearity<double>("combustion");
        const auto step = exponential_euler_step<double>(p, u0, 0.0, 1e-4, 1e-8).u;
        if (m == 1) {
            ref_apply = y;
            ref_newton = newton;
            ref_step = step;
        } else {
            mismatches += !same(y, ref_apply) + !same(newton, ref_newton) + !same(step, ref_step);
        }
    }
    return {"partition", mismatches == 0,
            std::to_string(mismatches) + " bitwise mismatches over m = 2..4 (apply, Newton, step)"};
}

double manufactured_error(double h) {
    const Grid3D g(31, 1, 1);
    const double dx = g.dx();
    const double l1 = (2.0 - 2.0 * std::cos(std::numbers::pi * dx)) / (dx * dx);
    std::vector<double> s(g.size());
    for (int i = 0; i < g.nx(); ++i) s[static_cast<std::size_t>(i)] = std::sin(std::numbers::pi * g.coord(0, i));
    SemilinearProblem<double> p;
    p.A = std::make_shared<StencilLinearOperator<double>>(StencilOperator<double>{g});
    p.g = {"manufactured", [s, l1](double t, std::size_t lo, std::size_t hi, std::span<const double> u,
                                   std::span<double> out) {
               for (std::size_t i = lo; i < hi; ++i) {
                   const double exact = (1.0 + t) * s[i];
                   out[i] = u[i] * u[i] + s[i] + l1 * exact - exact * exact;
               }
           }};
    p.u0 = s;
    StepperConfig cfg;
    cfg.h = h;
    cfg.t_end = 1.0;
    cfg.tol = 1e-10;
    const auto u = integrate(p, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) err = std::max(err, std::abs(u[i] - 2.0 * s[i]));
    return err;
}

// Observed order of exponential Euler on u' = -Au + u^2 + f with exact
// solution (1 + t) sin(pi x).
VerifyOutcome verify_order() {
    const double e1 = manufactured_error(1e-2), e2 = manufactured_error(5e-3), e3 = manufactured_error(2.5e-3);
    const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    const bool ok = p1 >= 0.9 && p1 <= 1.1 && p2 >= 0.9 && p2 <= 1.1;
    std::ostringstream os;
    os << std::setprecision(4) << "observed orders " << p1 << ", " << p2 << " (errors " << sci(e1) << ", "
       << sci(e2) << ", " << sci(e3) << ")";
    return {"order", ok, os.str()};
}

} // namespace

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names{"stencil", "leja", "partition", "order"};
    return names;
}

VerifyOutcome run_verify_suite(const std::string& name) {
    if (name == "stencil") return verify_stencil();
    if (name == "leja") return verify_leja();
    if (name == "partition") return verify_partition();
    if (name == "order") return verify_order();
    throw ConfigError("unknown verify suite '" + name + "'");
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream&) {
    const auto& all = verify_suite_names();
    std::vector<std::string> selected = o.only.empty() ? all : o.only;
    for (const auto& s : selected) {
        if (std::find(all.begin(), all.end(), s) == all.end()) throw ConfigError("unknown verify suite '" + s + "'");
    }
    if (!o.inject_failure.empty() && std::find(all.begin(), all.end(), o.inject_failure) == all.end()) {
        throw ConfigError("unknown verify suite '" + o.inject_failure + "'");
    }
    bool all_passed = true;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : selected) {
        VerifyOutcome r;
        try {
            r = run_verify_suite(s);
        } catch (const Error& e) {
            r = {s, false, std::string("threw: ") + e.what()};
        }
        if (s == o.inject_failure) {
            r.passed = false;
            r.detail = "failure injected";
        }
        all_passed = all_passed && r.passed;
        if (o.json) j.push_back({{"suite", r.name}, {"passed", r.passed}, {"detail", r.detail}});
        else out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    }
    if (o.json) out << j.dump(2) << '\n';
    return all_passed ? exit_ok : exit_runtime;
}

} // namespace expint::cli
