#include "expint/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace expint {

double combustion_g(double u) {
    return 0.25 * (2.0 - u) * std::exp(20.0 * (1.0 - 1.0 / u));
}

namespace {

[[noreturn]] void throw_combustion_domain(std::size_t i, double u) {
    throw DomainError("combustion nonlinearity needs u > 0, got u[" + std::to_string(i) +
                          "] = " + std::to_string(u),
                      i);
}

} // namespace

Field<double> combustion_g(const Field<double>& u) {
    Field<double> out(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0)) throw_combustion_domain(i, u[i]);
        out[i] = combustion_g(u[i]);
    }
    return out;
}

template <class T>
Nonlinearity<T> combustion_nonlinearity() {
    if constexpr (is_complex_v<T>) {
        throw ConfigError("the combustion nonlinearity is real-valued");
    } else {
        return {"combustion", [](double, std::size_t lo, std::size_t hi, std::span<const T> u,
                                 std::span<T> out) {
                    for (std::size_t i = lo; i < hi; ++i) {
                        const double v = static_cast<double>(u[i]);
                        if (!(v > 0.0)) throw_combustion_domain(i, v);
                        out[i] = static_cast<T>(combustion_g(v));
                    }
                }};
    }
}

std::vector<std::string> nonlinearity_names() {
    return {"zero", "combustion", "square"};
}

template <class T>
Nonlinearity<T> make_nonlinearity(const std::string& name) {
    if (name == "zero") return Nonlinearity<T>::pointwise("zero", [](T) { return T{}; });
    if (name == "square") return Nonlinearity<T>::pointwise("square", [](T u) { return u * u; });
    if (name == "combustion") return combustion_nonlinearity<T>();
    throw ConfigError("unknown nonlinearity '" + name + "'");
}

template <class T>
void SemilinearProblem<T>::validate() const {
    if (!A) throw ConfigError("problem has no operator");
    if (!g.eval) throw ConfigError("problem has no nonlinearity");
    if (u0.size() != A->size()) {
        throw DimensionError("u0 has " + std::to_string(u0.size()) + " entries, operator size is " +
                             std::to_string(A->size()));
    }
    if (boundary_source && boundary_source->size() != A->size()) {
        throw DimensionError("boundary source length does not match the operator");
    }
}

void StepperConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size h must be positive");
    if (!(t_end >= h) || !std::isfinite(t_end)) throw ConfigError("t_end must be at least h");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_degree < 1) throw ConfigError("max_degree must be at least 1");
}

std::size_t StepperConfig::step_count() const {
    const double q = t_end / h;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(q));
}

template <class T>
StepResult<T> exponential_euler_step(const SemilinearProblem<T>& p, std::span<const T> u_n,
                                     const SpectralInterval& iv, double t_n, double h,
                                     const MatFuncOptions& opt) {
    const LinearOperator<T>& A = *p.A;
    const std::size_t n = A.size();
    if (u_n.size() != n) throw DimensionError("state length does not match the operator");

    std::vector<T> gv(n);
    A.for_each_block([&](std::size_t lo, std::size_t hi) {
        p.g.eval(t_n, lo, hi, u_n, std::span<T>(gv));
        if (p.boundary_source) {
            const auto& b = *p.boundary_source;
            for (std::size_t i = lo; i < hi; ++i) gv[i] -= b[i];
        }
    });

    auto e = expmv(A, iv, h, u_n, opt);
    auto f = phi1mv(A, iv, h, std::span<const T>(gv), opt);

    StepResult<T> r;
    r.u = std::move(e.y);
    const T hh = static_cast<T>(h);
    A.for_each_block([&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) r.u[i] += hh * f.y[i];
    });
    r.stats.matvecs = e.matvecs + f.matvecs;
    r.stats.degree_exp = e.degree;
    r.stats.degree_phi1 = f.degree;
    r.stats.halvings = std::max(e.halvings, f.halvings);
    return r;
}

template <class T>
StepResult<T> exponential_euler_step(const SemilinearProblem<T>& p, std::span<const T> u_n, double t_n,
                                     double h, double tol, std::size_t max_degree) {
    MatFuncOptions opt;
    opt.tol = tol;
    opt.max_degree = max_degree;
    return exponential_euler_step(p, u_n, p.spectral_interval(), t_n, h, opt);
}

template <class T>
std::vector<T> integrate(const SemilinearProblem<T>& p, const StepperConfig& cfg,
                         const StepObserver& observer) {
    cfg.validate();
    p.validate();
    const SpectralInterval iv = p.spectral_interval();
    MatFuncOptions opt;
    opt.tol = cfg.tol;
    opt.max_degree = cfg.max_degree;

    const std::size_t steps = cfg.step_count();
    std::vector<T> u = p.u0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * cfg.h;
        const bool last = k + 1 == steps;
        const double h = last ? cfg.t_end - t : cfg.h;
        StepResult<T> r;
        try {
            r = exponential_euler_step(p, std::span<const T>(u), iv, t, h, opt);
        } catch (const Error& e) {
            std::throw_with_nested(
                IntegrationError("step " + std::to_string(k + 1) + " failed: " + e.what(), k + 1));
        }
        u = std::move(r.u);
        if (observer) {
            double mx = 0.0;
            for (const T& v : u) mx = std::max(mx, static_cast<double>(std::abs(v)));
            observer({k + 1, last ? cfg.t_end : t + h, r.stats.matvecs, mx});
        }
    }
    return u;
}

#define EXPINT_INSTANTIATE_INTEGRATOR(T)                                                            \
    template Nonlinearity<T> combustion_nonlinearity<T>();                                          \
    template Nonlinearity<T> make_nonlinearity<T>(const std::string&);                              \
    template struct SemilinearProblem<T>;                                                           \
    template StepResult<T> exponential_euler_step<T>(const SemilinearProblem<T>&, std::span<const T>, \
                                                     const SpectralInterval&, double, double,       \
                                                     const MatFuncOptions&);                        \
    template StepResult<T> exponential_euler_step<T>(const SemilinearProblem<T>&, std::span<const T>, \
                                                     double, double, double, std::size_t);          \
    template std::vector<T> integrate<T>(const SemilinearProblem<T>&, const StepperConfig&,         \
                                         const StepObserver&);

EXPINT_INSTANTIATE_INTEGRATOR(float)
EXPINT_INSTANTIATE_INTEGRATOR(double)
EXPINT_INSTANTIATE_INTEGRATOR(std::complex<double>)

#undef EXPINT_INSTANTIATE_INTEGRATOR

} // namespace expint
