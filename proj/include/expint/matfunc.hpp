#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "expint/linear_operator.hpp"

namespace expint {

enum class Target { exp, phi1 };

std::string to_string(Target t);

/// (e^z - 1)/z with phi1(0) = 1.
double phi1_scalar(double z);
std::complex<double> phi1_scalar(std::complex<double> z);

/// First `count` Leja points of the canonical interval [-2, 2], starting at 2.
///
/// Maximization runs over 100001 equispaced candidates. The sequence is
/// computed once and cached, so repeated calls return identical prefixes.
std::vector<double> canonical_leja_points(std::size_t count);

/// Leja points of `iv` (positions along its axis), the canonical sequence
/// mapped affinely onto [a, b]. A degenerate interval yields `count` copies of a.
std::vector<double> leja_points(const SpectralInterval& iv, std::size_t count);

/// Candidate grid size for the Leja maximization.
inline constexpr std::size_t leja_candidates = 100001;

/// Divided differences f[x_0..x_k] of f(x) = target(scale*x + shift).
///
/// Evaluated as the first column of f applied to the lower bidiagonal matrix
/// with diagonal scale*x_k + shift and subdiagonal `scale`, using Taylor
/// substeps. Repeated nodes are allowed and give derivatives.
std::vector<std::complex<double>> divided_differences(std::span<const double> nodes, Target target,
                                                      std::complex<double> scale,
                                                      std::complex<double> shift);

inline std::vector<std::complex<double>> divided_differences(std::span<const double> nodes,
                                                             Target target, double h) {
    return divided_differences(nodes, target, h, 0.0);
}

/// Newton interpolant of lambda -> target(-h lambda) at Leja points of an interval.
///
/// The operator recurrence is w_{k+1} = (alpha A + beta_k I) w_k, so every
/// product has the fused form. For the imaginary axis alpha is complex.
struct LejaInterpolant {
    SpectralInterval interval;
    Target target = Target::exp;
    double h = 0.0;
    std::size_t max_degree = 0;
    double tol = 0.0;

    std::vector<double> nodes;                 // positions along the interval axis
    std::vector<std::complex<double>> dd;      // len(nodes)
    std::complex<double> alpha{1.0, 0.0};
    std::vector<std::complex<double>> beta;    // beta[k] used for w_{k+1}

    static LejaInterpolant build(const SpectralInterval& iv, Target target, double h,
                                 std::size_t max_degree, double tol);
};

template <class T>
struct NewtonResult {
    std::vector<T> y;
    std::size_t matvecs = 0;
    std::size_t degree = 0;
};

/// p(-hA)v in Newton form. Stops once two consecutive terms satisfy
/// |dd[k]| ||w_k|| <= tol ||partial sum||; throws ConvergenceError when the
/// interpolant is exhausted first.
template <class T>
NewtonResult<T> newton_apply(const LinearOperator<T>& A, const LejaInterpolant& ip,
                             std::span<const T> v, double tol);

template <class T>
NewtonResult<T> newton_apply(const LinearOperator<T>& A, const LejaInterpolant& ip,
                             std::span<const T> v) {
    return newton_apply(A, ip, v, ip.tol);
}

struct MatFuncOptions {
    double tol = 1e-8;
    std::size_t max_degree = 150;
    int max_halvings = 10;
};

template <class T>
struct MatFuncResult {
    std::vector<T> y;
    std::size_t matvecs = 0;
    std::size_t degree = 0; // largest degree over all substeps
    int halvings = 0;
};

/// exp(-hA)v. On ConvergenceError the step is halved and the pieces composed.
template <class T>
MatFuncResult<T> expmv(const LinearOperator<T>& A, const SpectralInterval& iv, double h,
                       std::span<const T> v, const MatFuncOptions& opt = {});

/// phi1(-hA)v, with the same halving rescue as expmv.
template <class T>
MatFuncResult<T> phi1mv(const LinearOperator<T>& A, const SpectralInterval& iv, double h,
                        std::span<const T> v, const MatFuncOptions& opt = {});

template <class T>
MatFuncResult<T> apply_target(Target target, const LinearOperator<T>& A,
                              const SpectralInterval& iv, double h, std::span<const T> v,
                              const MatFuncOptions& opt = {}) {
    return target == Target::exp ? expmv(A, iv, h, v, opt) : phi1mv(A, iv, h, v, opt);
}

namespace detail {

/// Euclidean norm accumulated in index order (double precision).
template <class T>
double norm2(std::span<const T> x) {
    double s = 0.0;
    for (const T& v : x) s += static_cast<double>(std::norm(v));
    return std::sqrt(s);
}

template <class T>
T scalar_from(std::complex<double> z) {
    if constexpr (is_complex_v<T>) {
        return T(z);
    } else {
        return static_cast<T>(z.real());
    }
}

} // namespace detail

} // namespace expint
