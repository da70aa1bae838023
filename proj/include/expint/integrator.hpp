#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expint/matfunc.hpp"

namespace expint {

/// g(t, u) evaluated over the index block [lo, hi) of global vectors.
///
/// Blocks let partitioned operators evaluate the nonlinearity slab by slab;
/// a block must only write out[lo..hi).
template <class T>
struct Nonlinearity {
    using BlockFn = std::function<void(double t, std::size_t lo, std::size_t hi, std::span<const T> u,
                                       std::span<T> out)>;

    std::string name;
    BlockFn eval;

    static Nonlinearity pointwise(std::string name, std::function<T(T)> f) {
        return {std::move(name), [f = std::move(f)](double, std::size_t lo, std::size_t hi,
                                                    std::span<const T> u, std::span<T> out) {
                    for (std::size_t i = lo; i < hi; ++i) out[i] = f(u[i]);
                }};
    }
};

/// 1/4 (2 - u) exp(20 (1 - 1/u)) for u > 0.
double combustion_g(double u);

/// Pointwise combustion nonlinearity; throws DomainError at the first u_i <= 0.
Field<double> combustion_g(const Field<double>& u);

template <class T>
Nonlinearity<T> combustion_nonlinearity();

/// Registered names: zero, combustion, square (g(u) = u^2).
template <class T>
Nonlinearity<T> make_nonlinearity(const std::string& name);

std::vector<std::string> nonlinearity_names();

/// du/dt + A u = g(t, u) - b.
template <class T>
struct SemilinearProblem {
    std::shared_ptr<const LinearOperator<T>> A;
    Nonlinearity<T> g;
    std::vector<T> u0;
    std::optional<std::vector<T>> boundary_source;
    std::optional<SpectralInterval> interval; // Gershgorin bound of A when unset

    void validate() const;
    SpectralInterval spectral_interval() const {
        return interval ? *interval : A->spectral_interval();
    }
};

struct StepperConfig {
    double h = 1e-4;
    double t_end = 1e-4;
    double tol = 1e-8;
    std::size_t max_degree = 150;

    void validate() const;
    /// Number of steps, the last one shortened when t_end is not a multiple of h.
    std::size_t step_count() const;
};

struct StepStats {
    std::size_t matvecs = 0;
    std::size_t degree_exp = 0;
    std::size_t degree_phi1 = 0;
    int halvings = 0;
};

template <class T>
struct StepResult {
    std::vector<T> u;
    StepStats stats;
};

/// u_{n+1} = exp(-hA) u_n + h phi1(-hA) (g(t_n, u_n) - b).
template <class T>
StepResult<T> exponential_euler_step(const SemilinearProblem<T>& p, std::span<const T> u_n, double t_n,
                                     double h, double tol, std::size_t max_degree = 150);

template <class T>
StepResult<T> exponential_euler_step(const SemilinearProblem<T>& p, std::span<const T> u_n,
                                     const SpectralInterval& iv, double t_n, double h,
                                     const MatFuncOptions& opt);

struct StepInfo {
    std::size_t step = 0; // 1-based
    double t = 0.0;
    std::size_t matvecs = 0;
    double max_norm = 0.0;
};

using StepObserver = std::function<void(const StepInfo&)>;

/// Raised by integrate with the failing step; the original error is nested.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

template <class T>
std::vector<T> integrate(const SemilinearProblem<T>& p, const StepperConfig& cfg,
                         const StepObserver& observer = {});

} // namespace expint
