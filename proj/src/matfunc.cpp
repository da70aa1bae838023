#include "expint/matfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace expint {

using cd = std::complex<double>;

std::string to_string(Target t) {
    return t == Target::exp ? "exp" : "phi1";
}

// ---------------------------------------------------------------------------
// Spectral intervals

template <class T>
SpectralInterval gershgorin_interval(const StencilOperator<T>& op) {
    const Grid3D& g = op.grid;
    const bool periodic = op.bc.kind() == BoundaryCondition::Kind::none;
    const int ext[3] = {g.nx(), g.ny(), g.nz()};
    double w[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        if (!g.collapsed(a)) w[a] = 1.0 / (g.spacing(a) * g.spacing(a));
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int iz = 0; iz < ext[2]; ++iz) {
        for (int iy = 0; iy < ext[1]; ++iy) {
            for (int ix = 0; ix < ext[0]; ++ix) {
                const int idx[3] = {ix, iy, iz};
                double diag = 0.0, radius = 0.0;
                for (int a = 0; a < 3; ++a) {
                    if (w[a] == 0.0) continue;
                    diag += 2.0 * w[a];
                    int neighbours = 2;
                    if (!periodic) neighbours = (idx[a] > 0) + (idx[a] < ext[a] - 1);
                    radius += neighbours * w[a];
                }
                double d = 1.0;
                if (op.coeff) d = op.coeff->fn(g.coord(0, ix), g.coord(1, iy), g.coord(2, iz));
                const double ad = std::abs(d);
                lo = std::min(lo, d * diag - ad * radius);
                hi = std::max(hi, d * diag + ad * radius);
            }
        }
    }
    return {lo, hi, SpectralAxis::real};
}

template <class T>
SpectralInterval gershgorin_interval(const CsrMatrix<T>& A, SpectralAxis axis) {
    if (!A.square()) throw DimensionError("Gershgorin interval needs a square matrix");
    if (A.nrows() == 0) return {0.0, 0.0, axis};
    const auto rp = A.row_ptr();
    const auto ci = A.col_idx();
    const auto va = A.values();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < A.nrows(); ++r) {
        cd center = 0.0;
        double radius = 0.0;
        for (auto k = rp[r]; k < rp[r + 1]; ++k) {
            if (static_cast<std::size_t>(ci[k]) == r) {
                center = cd(va[k]);
            } else {
                radius += std::abs(va[k]);
            }
        }
        const double c = axis == SpectralAxis::real ? center.real() : center.imag();
        lo = std::min(lo, c - radius);
        hi = std::max(hi, c + radius);
    }
    return {lo, hi, axis};
}

template <class T>
bool is_skew_hermitian(const CsrMatrix<T>& A) {
    if (!A.square()) return false;
    const auto rp = A.row_ptr();
    const auto ci = A.col_idx();
    const auto va = A.values();
    for (std::size_t r = 0; r < A.nrows(); ++r) {
        for (auto k = rp[r]; k < rp[r + 1]; ++k) {
            const cd v(va[k]);
            const cd m(A.coeff(static_cast<std::size_t>(ci[k]), r));
            if (m != -std::conj(v)) return false;
        }
    }
    return true;
}

template <class T>
bool is_hermitian(const CsrMatrix<T>& A) {
    if (!A.square()) return false;
    const auto rp = A.row_ptr();
    const auto ci = A.col_idx();
    const auto va = A.values();
    for (std::size_t r = 0; r < A.nrows(); ++r) {
        for (auto k = rp[r]; k < rp[r + 1]; ++k) {
            const cd v(va[k]);
            const cd m(A.coeff(static_cast<std::size_t>(ci[k]), r));
            if (m != std::conj(v)) return false;
        }
    }
    return true;
}

template <class T>
SpectralInterval gershgorin_interval(const CsrMatrix<T>& A) {
    if constexpr (is_complex_v<T>) {
        if (A.nnz() > 0 && is_skew_hermitian(A)) return gershgorin_interval(A, SpectralAxis::imaginary);
    }
    return gershgorin_interval(A, SpectralAxis::real);
}

// ---------------------------------------------------------------------------
// phi1

double phi1_scalar(double z) {
    if (std::abs(z) > 1e-2) return std::expm1(z) / z;
    double p = 1.0 / 40320.0;
    p = p * z + 1.0 / 5040.0;
    p = p * z + 1.0 / 720.0;
    p = p * z + 1.0 / 120.0;
    p = p * z + 1.0 / 24.0;
    p = p * z + 1.0 / 6.0;
    p = p * z + 0.5;
    return p * z + 1.0;
}

cd phi1_scalar(cd z) {
    if (std::abs(z) > 1e-2) {
        const double x = z.real(), y = z.imag();
        const double s = std::sin(0.5 * y);
        const cd em1(std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y));
        return em1 / z;
    }
    cd p = 1.0 / 40320.0;
    p = p * z + 1.0 / 5040.0;
    p = p * z + 1.0 / 720.0;
    p = p * z + 1.0 / 120.0;
    p = p * z + 1.0 / 24.0;
    p = p * z + 1.0 / 6.0;
    p = p * z + 0.5;
    return p * z + 1.0;
}

// ---------------------------------------------------------------------------
// Leja points

namespace {

struct LejaCache {
    std::mutex mu;
    std::vector<double> points;
    std::vector<double> logprod; // sum of log-distances to chosen points, per candidate
};

LejaCache& leja_cache() {
    static LejaCache cache;
    return cache;
}

double candidate(std::size_t j) {
    return -2.0 + (4.0 * static_cast<double>(j)) / static_cast<double>(leja_candidates - 1);
}

} // namespace

std::vector<double> canonical_leja_points(std::size_t count) {
    if (count > leja_candidates) {
        throw SizeLimitError("requested " + std::to_string(count) + " Leja points, candidate grid has " +
                             std::to_string(leja_candidates));
    }
    LejaCache& c = leja_cache();
    std::lock_guard lock(c.mu);
    if (c.logprod.empty()) c.logprod.assign(leja_candidates, 0.0);
    const double taken = -std::numeric_limits<double>::infinity();
    while (c.points.size() < count) {
        std::size_t best = leja_candidates - 1;
        if (!c.points.empty()) {
            best = 0;
            for (std::size_t j = 1; j < leja_candidates; ++j) {
                if (c.logprod[j] > c.logprod[best]) best = j;
            }
        }
        const double xi = candidate(best);
        c.points.push_back(xi);
        for (std::size_t j = 0; j < leja_candidates; ++j) {
            if (c.logprod[j] == taken) continue;
            c.logprod[j] = j == best ? taken : c.logprod[j] + std::log(std::abs(candidate(j) - xi));
        }
    }
    return {c.points.begin(), c.points.begin() + static_cast<std::ptrdiff_t>(count)};
}

namespace {

bool degenerate(const SpectralInterval& iv) {
    const double scale = std::max({1.0, std::abs(iv.a), std::abs(iv.b)});
    return iv.b - iv.a <= 1e-14 * scale;
}

} // namespace

std::vector<double> leja_points(const SpectralInterval& iv, std::size_t count) {
    if (iv.b < iv.a) throw DimensionError("interval endpoints out of order");
    if (degenerate(iv)) return std::vector<double>(count, iv.center());
    const double c = iv.center(), gamma = 0.25 * iv.width();
    auto xi = canonical_leja_points(count);
    for (double& x : xi) x = c + gamma * x;
    return xi;
}

// ---------------------------------------------------------------------------
// Divided differences

namespace {

/// First column of exp(L) for L lower bidiagonal with diagonal d and subdiagonal e.
std::vector<cd> exp_bidiagonal_first_column(const std::vector<cd>& d, const std::vector<cd>& e) {
    const std::size_t m = d.size();
    double nrm = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        nrm = std::max(nrm, std::abs(d[k]) + (k > 0 ? std::abs(e[k - 1]) : 0.0));
    }
    constexpr double max_substeps = 1e6;
    if (!std::isfinite(nrm) || nrm > max_substeps) {
        throw ConvergenceError("interval too large for the interpolation degree (scaled norm " +
                                   std::to_string(nrm) + ")",
                               std::numeric_limits<double>::infinity());
    }
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(nrm)));
    const double inv = 1.0 / static_cast<double>(substeps);

    std::vector<cd> v(m, 0.0), term(m), next(m), sum(m);
    v[0] = 1.0;
    const double eps = std::numeric_limits<double>::epsilon() * 0.25;
    const std::size_t max_terms = m + 60;
    for (std::size_t s = 0; s < substeps; ++s) {
        term = v;
        sum = v;
        for (std::size_t j = 1; j <= max_terms; ++j) {
            const double f = inv / static_cast<double>(j);
            next[0] = d[0] * term[0] * f;
            for (std::size_t k = 1; k < m; ++k) next[k] = (d[k] * term[k] + e[k - 1] * term[k - 1]) * f;
            std::swap(term, next);
            bool done = j + 1 >= m || s > 0;
            for (std::size_t k = 0; k < m; ++k) {
                sum[k] += term[k];
                if (std::abs(term[k]) > eps * std::abs(sum[k])) done = false;
            }
            if (done) break;
        }
        v = sum;
    }
    for (const cd& x : v) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
            throw ConvergenceError("divided differences overflowed; interval too large for the degree",
                                   std::numeric_limits<double>::infinity());
        }
    }
    return v;
}

cd eval_target(Target target, cd z) {
    return target == Target::exp ? std::exp(z) : phi1_scalar(z);
}

} // namespace

std::vector<cd> divided_differences(std::span<const double> nodes, Target target, cd scale, cd shift) {
    const std::size_t n = nodes.size();
    if (n == 0) return {};
    std::vector<cd> d, e;
    if (target == Target::exp) {
        d.resize(n);
        e.assign(n - 1, scale);
        for (std::size_t k = 0; k < n; ++k) d[k] = scale * nodes[k] + shift;
        auto dd = exp_bidiagonal_first_column(d, e);
        dd[0] = eval_target(target, d[0]);
        return dd;
    }
    // phi1 divided differences are the trailing entries of exp of the
    // matrix augmented by a leading zero node with unit coupling.
    d.resize(n + 1);
    e.assign(n, scale);
    d[0] = 0.0;
    e[0] = 1.0;
    for (std::size_t k = 0; k < n; ++k) d[k + 1] = scale * nodes[k] + shift;
    auto col = exp_bidiagonal_first_column(d, e);
    std::vector<cd> dd(col.begin() + 1, col.end());
    dd[0] = eval_target(target, d[1]);
    return dd;
}

LejaInterpolant LejaInterpolant::build(const SpectralInterval& iv, Target target, double h,
                                       std::size_t max_degree, double tol) {
    if (iv.b < iv.a) throw DimensionError("interval endpoints out of order");
    LejaInterpolant ip;
    ip.interval = iv;
    ip.target = target;
    ip.h = h;
    ip.max_degree = max_degree;
    ip.tol = tol;
    const std::size_t count = max_degree + 1;
    const cd unit = iv.axis == SpectralAxis::real ? cd(1.0, 0.0) : cd(0.0, 1.0);
    const cd center = unit * iv.center();

    std::vector<double> xi;
    cd gamma;
    if (degenerate(iv)) {
        xi.assign(count, 0.0);
        gamma = 1.0;
    } else {
        xi = canonical_leja_points(count);
        gamma = unit * (0.25 * iv.width());
    }
    ip.nodes.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        ip.nodes[k] = iv.center() + (degenerate(iv) ? 0.0 : 0.25 * iv.width() * xi[k]);
    }
    ip.alpha = 1.0 / gamma;
    ip.beta.resize(count);
    for (std::size_t k = 0; k < count; ++k) ip.beta[k] = -center / gamma - xi[k];
    ip.dd = divided_differences(xi, target, -h * gamma, -h * center);
    return ip;
}

// ---------------------------------------------------------------------------
// Newton evaluation

namespace {

template <class T>
std::vector<T> newton_impl(const LinearOperator<T>& A, const LejaInterpolant& ip, std::span<const T> v,
                           double tol, std::size_t& matvecs, std::size_t& degree) {
    const std::size_t n = A.size();
    if (v.size() != n) {
        throw DimensionError("vector of length " + std::to_string(v.size()) + " for an operator of size " +
                             std::to_string(n));
    }
    if constexpr (!is_complex_v<T>) {
        if (ip.alpha.imag() != 0.0) {
            throw DimensionError("imaginary-axis interpolation needs a complex operator");
        }
    }
    std::vector<T> y(n), w(v.begin(), v.end()), tmp(n);
    degree = 0;
    if (detail::norm2(v) == 0.0) return y;

    const T alpha = detail::scalar_from<T>(ip.alpha);
    const T d0 = detail::scalar_from<T>(ip.dd[0]);
    A.for_each_block([&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) y[i] = d0 * w[i];
    });
    int satisfied = 0;
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < ip.dd.size(); ++k) {
        A.fused_apply(alpha, detail::scalar_from<T>(ip.beta[k - 1]), std::span<const T>(w),
                      std::span<T>(tmp));
        ++matvecs;
        std::swap(w, tmp);
        const T dk = detail::scalar_from<T>(ip.dd[k]);
        A.for_each_block([&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) y[i] += dk * w[i];
        });
        const double term = std::abs(ip.dd[k]) * detail::norm2(std::span<const T>(w));
        const double ynorm = detail::norm2(std::span<const T>(y));
        if (!std::isfinite(term) || !std::isfinite(ynorm)) {
            throw ConvergenceError("Newton series diverged at degree " + std::to_string(k),
                                   std::numeric_limits<double>::infinity());
        }
        residual = ynorm > 0.0 ? term / ynorm : term;
        if (term <= tol * ynorm) {
            if (++satisfied == 2) {
                degree = k;
                return y;
            }
        } else {
            satisfied = 0;
        }
    }
    throw ConvergenceError("no convergence within degree " + std::to_string(ip.dd.size() - 1) +
                               " (relative term " + std::to_string(residual) + ")",
                           residual);
}

template <class T>
MatFuncResult<T> substepped(Target target, const LinearOperator<T>& A, const SpectralInterval& iv,
                            double h, std::span<const T> v, const MatFuncOptions& opt) {
    MatFuncResult<T> out;
    double residual = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= opt.max_halvings; ++j) {
        const std::size_t pieces = std::size_t{1} << j;
        const double tau = h / static_cast<double>(pieces);
        try {
            std::size_t deg = 0;
            const auto E = LejaInterpolant::build(iv, Target::exp, tau, opt.max_degree, opt.tol);
            if (target == Target::exp) {
                std::vector<T> y(v.begin(), v.end());
                for (std::size_t p = 0; p < pieces; ++p) {
                    y = newton_impl(A, E, std::span<const T>(y), opt.tol, out.matvecs, deg);
                    out.degree = std::max(out.degree, deg);
                }
                out.y = std::move(y);
            } else {
                const auto P = LejaInterpolant::build(iv, Target::phi1, tau, opt.max_degree, opt.tol);
                const auto q = newton_impl(A, P, v, opt.tol, out.matvecs, deg);
                out.degree = std::max(out.degree, deg);
                std::vector<T> y = q;
                for (std::size_t p = 1; p < pieces; ++p) {
                    y = newton_impl(A, E, std::span<const T>(y), opt.tol, out.matvecs, deg);
                    out.degree = std::max(out.degree, deg);
                    A.for_each_block([&](std::size_t lo, std::size_t hi) {
                        for (std::size_t i = lo; i < hi; ++i) y[i] += q[i];
                    });
                }
                if (pieces > 1) {
                    const T scale = T(1) / static_cast<T>(static_cast<double>(pieces));
                    A.for_each_block([&](std::size_t lo, std::size_t hi) {
                        for (std::size_t i = lo; i < hi; ++i) y[i] *= scale;
                    });
                }
                out.y = std::move(y);
            }
            out.halvings = j;
            return out;
        } catch (const ConvergenceError& e) {
            residual = e.residual_estimate();
        }
    }
    throw ConvergenceError(to_string(target) + " evaluation failed after " +
                               std::to_string(opt.max_halvings) + " step halvings",
                           residual);
}

} // namespace

template <class T>
NewtonResult<T> newton_apply(const LinearOperator<T>& A, const LejaInterpolant& ip, std::span<const T> v,
                             double tol) {
    NewtonResult<T> r;
    r.y = newton_impl(A, ip, v, tol, r.matvecs, r.degree);
    return r;
}

template <class T>
MatFuncResult<T> expmv(const LinearOperator<T>& A, const SpectralInterval& iv, double h,
                       std::span<const T> v, const MatFuncOptions& opt) {
    return substepped(Target::exp, A, iv, h, v, opt);
}

template <class T>
MatFuncResult<T> phi1mv(const LinearOperator<T>& A, const SpectralInterval& iv, double h,
                        std::span<const T> v, const MatFuncOptions& opt) {
    return substepped(Target::phi1, A, iv, h, v, opt);
}

#define EXPINT_INSTANTIATE_GERSH(T)                                                       \
    template SpectralInterval gershgorin_interval<T>(const StencilOperator<T>&);          \
    template SpectralInterval gershgorin_interval<T>(const CsrMatrix<T>&);                \
    template SpectralInterval gershgorin_interval<T>(const CsrMatrix<T>&, SpectralAxis);  \
    template bool is_skew_hermitian<T>(const CsrMatrix<T>&);                              \
    template bool is_hermitian<T>(const CsrMatrix<T>&);

#define EXPINT_INSTANTIATE_MATFUNC(T)                                                                  \
    template NewtonResult<T> newton_apply<T>(const LinearOperator<T>&, const LejaInterpolant&,         \
                                             std::span<const T>, double);                             \
    template MatFuncResult<T> expmv<T>(const LinearOperator<T>&, const SpectralInterval&, double,      \
                                       std::span<const T>, const MatFuncOptions&);                    \
    template MatFuncResult<T> phi1mv<T>(const LinearOperator<T>&, const SpectralInterval&, double,     \
                                        std::span<const T>, const MatFuncOptions&);

EXPINT_INSTANTIATE_GERSH(float)
EXPINT_INSTANTIATE_GERSH(double)
EXPINT_INSTANTIATE_GERSH(std::complex<double>)
EXPINT_INSTANTIATE_MATFUNC(float)
EXPINT_INSTANTIATE_MATFUNC(double)
EXPINT_INSTANTIATE_MATFUNC(std::complex<double>)

#undef EXPINT_INSTANTIATE_GERSH
#undef EXPINT_INSTANTIATE_MATFUNC

} // namespace expint
