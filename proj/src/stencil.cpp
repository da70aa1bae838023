#include "expint/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>
#include <vector>

namespace expint {

std::string to_string(Traversal t) { return t == Traversal::naive ? "naive" : "tiled"; }

Traversal parse_traversal(const std::string& s) {
    if (s == "naive") return Traversal::naive;
    if (s == "tiled" || s == "optimized") return Traversal::tiled;
    throw ConfigError("unknown method '" + s + "' (expected naive or tiled)");
}

Coefficient inverse_radial_diffusion() {
    return Coefficient{[](double x, double y, double) { return 1.0 / std::sqrt(1.0 + x * x + y * y); },
                       6, "1/sqrt(1+x^2+y^2)"};
}

namespace {

template <class T>
struct real_of {
    using type = T;
};
template <class T>
struct real_of<std::complex<T>> {
    using type = T;
};
template <class T>
using real_of_t = typename real_of<T>::type;

template <class T>
class Sweep {
    using R = real_of_t<T>;

public:
    Sweep(const StencilOperator<T>& op, T alpha, T beta, const T* x, T* y)
        : op_(op), g_(op.grid), x_(x), y_(y), alpha_(alpha), beta_(beta),
          alpha_zero_(alpha == T{}), use_beta_(beta != T{}),
          periodic_(op.bc.kind() == BoundaryCondition::Kind::none),
          iso_(op.grid.isotropic()), nx_(g_.nx()), ny_(g_.ny()), nz_(g_.nz()),
          plane_(g_.plane_size()) {
        for (int a = 0; a < 3; ++a) {
            collapsed_[a] = g_.collapsed(a);
            const double inv_h2 = 1.0 / (g_.spacing(a) * g_.spacing(a));
            axis_factor_[a] = collapsed_[a] ? T{} : alpha * T(static_cast<R>(inv_h2));
        }
        iso_factor_ = axis_factor_[0];
    }

    void run(int z_lo, int z_hi, const T* below, const T* above) const {
        if (op_.traversal == Traversal::naive) {
            for (int iz = z_lo; iz < z_hi; ++iz) {
                const T* zm = lower_plane(iz, z_lo, below);
                const T* zp = upper_plane(iz, z_hi, above);
                std::size_t i = static_cast<std::size_t>(iz) * plane_;
                for (int iy = 0; iy < ny_; ++iy) {
                    for (int ix = 0; ix < nx_; ++ix, ++i) y_[i] = general(ix, iy, iz, i, zm, zp);
                }
            }
            return;
        }
        const int tx = std::max(1, op_.tile.x);
        const int ty = std::max(1, op_.tile.y);
        for (int y0 = 0; y0 < ny_; y0 += ty) {
            const int y1 = std::min(ny_, y0 + ty);
            for (int x0 = 0; x0 < nx_; x0 += tx) {
                const int x1 = std::min(nx_, x0 + tx);
                for (int iz = z_lo; iz < z_hi; ++iz) {
                    const T* zm = lower_plane(iz, z_lo, below);
                    const T* zp = upper_plane(iz, z_hi, above);
                    const bool z_inner = zm && zp && !collapsed_[2];
                    const std::size_t base = static_cast<std::size_t>(iz) * plane_;
                    for (int iy = y0; iy < y1; ++iy) {
                        const bool y_inner = z_inner && iy > 0 && iy < ny_ - 1;
                        const std::size_t row = static_cast<std::size_t>(iy) * nx_;
                        for (int ix = x0; ix < x1; ++ix) {
                            const std::size_t i = base + row + ix;
                            if (y_inner && ix > 0 && ix < nx_ - 1) {
                                const std::size_t p = row + ix;
                                y_[i] = combine(x_[i], x_[i - 1], x_[i + 1], x_[i - nx_],
                                                x_[i + nx_], zm[p], zp[p], ix, iy, iz);
                            } else {
                                y_[i] = general(ix, iy, iz, i, zm, zp);
                            }
                        }
                    }
                }
            }
        }
    }

private:
    // Neighbour planes of iz: inside the slab they come from x, outside from
    // the supplied halo (nullptr = physical boundary).
    const T* lower_plane(int iz, int z_lo, const T* below) const {
        return iz > z_lo ? x_ + static_cast<std::size_t>(iz - 1) * plane_ : below;
    }
    const T* upper_plane(int iz, int z_hi, const T* above) const {
        return iz + 1 < z_hi ? x_ + static_cast<std::size_t>(iz + 1) * plane_ : above;
    }

    T ghost(int axis, int side, int ix, int iy, int iz) const {
        if (op_.bc.kind() != BoundaryCondition::Kind::dirichlet_function) return T{};
        double c[3] = {g_.coord(0, ix), g_.coord(1, iy), g_.coord(2, iz)};
        c[axis] = side < 0 ? 0.0 : 1.0;
        const double v = op_.bc.function()(c[0], c[1], c[2]);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "non-finite boundary value at (" << c[0] << "," << c[1] << "," << c[2] << ")";
            throw EvaluationError(os.str());
        }
        return T(static_cast<R>(v));
    }

    T general(int ix, int iy, int iz, std::size_t i, const T* zm_plane, const T* zp_plane) const {
        const T u = x_[i];
        if (alpha_zero_) return beta_ * u;
        T xm, xp, ym, yp, zm, zp;
        if (collapsed_[0]) {
            xm = xp = u;
        } else {
            xm = ix > 0 ? x_[i - 1] : (periodic_ ? x_[i + (nx_ - 1)] : ghost(0, -1, ix, iy, iz));
            xp = ix < nx_ - 1 ? x_[i + 1] : (periodic_ ? x_[i - (nx_ - 1)] : ghost(0, 1, ix, iy, iz));
        }
        const std::size_t sy = static_cast<std::size_t>(nx_);
        if (collapsed_[1]) {
            ym = yp = u;
        } else {
            ym = iy > 0 ? x_[i - sy] : (periodic_ ? x_[i + sy * (ny_ - 1)] : ghost(1, -1, ix, iy, iz));
            yp = iy < ny_ - 1 ? x_[i + sy]
                              : (periodic_ ? x_[i - sy * (ny_ - 1)] : ghost(1, 1, ix, iy, iz));
        }
        if (collapsed_[2]) {
            zm = zp = u;
        } else {
            const std::size_t p = i - static_cast<std::size_t>(iz) * plane_;
            zm = zm_plane ? zm_plane[p] : ghost(2, -1, ix, iy, iz);
            zp = zp_plane ? zp_plane[p] : ghost(2, 1, ix, iy, iz);
        }
        return combine(u, xm, xp, ym, yp, zm, zp, ix, iy, iz);
    }

    T combine(T u, T xm, T xp, T ym, T yp, T zm, T zp, int ix, int iy, int iz) const {
        if (alpha_zero_) return beta_ * u;
        T t;
        if (iso_) {
            t = (R(6) * u - (((((xm + xp) + ym) + yp) + zm) + zp)) * iso_factor_;
        } else {
            t = ((R(2) * u - xm - xp) * axis_factor_[0] + (R(2) * u - ym - yp) * axis_factor_[1]) +
                (R(2) * u - zm - zp) * axis_factor_[2];
        }
        if (op_.coeff) {
            t = t * static_cast<R>(op_.coeff->fn(g_.coord(0, ix), g_.coord(1, iy), g_.coord(2, iz)));
        }
        if (use_beta_) t = t + beta_ * u;
        return t;
    }

    const StencilOperator<T>& op_;
    const Grid3D& g_;
    const T* x_;
    T* y_;
    T alpha_, beta_;
    bool alpha_zero_, use_beta_, periodic_, iso_;
    int nx_, ny_, nz_;
    std::size_t plane_;
    bool collapsed_[3];
    T axis_factor_[3];
    T iso_factor_;
};

template <class T>
void check_sizes(const StencilOperator<T>& op, std::size_t nx, std::size_t ny) {
    if (nx != op.grid.size() || ny != op.grid.size()) {
        throw DimensionError("stencil operand length " + std::to_string(nx) + "/" +
                             std::to_string(ny) + " does not match grid size " +
                             std::to_string(op.grid.size()));
    }
}

template <class T>
void sweep_all(const StencilOperator<T>& op, T alpha, T beta, const T* x, T* y) {
    const Grid3D& g = op.grid;
    const int nz = g.nz();
    const std::size_t plane = g.plane_size();
    const bool periodic = op.bc.kind() == BoundaryCondition::Kind::none;
    const int workers = std::clamp(op.threads, 1, nz);

    auto range = [&](int lo, int hi) {
        const T* below = lo > 0 ? x + (lo - 1) * plane : (periodic ? x + (nz - 1) * plane : nullptr);
        const T* above = hi < nz ? x + hi * plane : (periodic ? x : nullptr);
        apply_slab(op, alpha, beta, x, y, lo, hi, below, above);
    };

    if (workers == 1) {
        range(0, nz);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            const int lo = static_cast<int>(static_cast<long long>(nz) * w / workers);
            const int hi = static_cast<int>(static_cast<long long>(nz) * (w + 1) / workers);
            pool.emplace_back([&, w, lo, hi] {
                try {
                    range(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace

template <class T>
void apply_slab(const StencilOperator<T>& op, T alpha, T beta, const T* x, T* y, int z_lo,
                int z_hi, const T* below, const T* above) {
    Sweep<T>(op, alpha, beta, x, y).run(z_lo, z_hi, below, above);
}

template <class T>
void affine_fused_apply(const StencilOperator<T>& op, T alpha, T beta, std::span<const T> x,
                        std::span<T> y) {
    check_sizes(op, x.size(), y.size());
    sweep_all(op, alpha, beta, x.data(), y.data());
}

template <class T>
void fused_apply(const StencilOperator<T>& op, T alpha, T beta, std::span<const T> x,
                 std::span<T> y) {
    if (!op.bc.is_linear()) {
        throw BoundaryKindError(
            "fused_apply needs a linear operator; split the boundary function off with "
            "apply_affine_split");
    }
    affine_fused_apply(op, alpha, beta, x, y);
}

template <class T>
Field<T> fused_apply(const StencilOperator<T>& op, T alpha, T beta, const Field<T>& x) {
    if (!(x.grid() == op.grid)) throw DimensionError("field grid does not match operator grid");
    Field<T> y(op.grid);
    fused_apply(op, alpha, beta, x.span(), y.span());
    return y;
}

template <class T>
Field<T> apply(const StencilOperator<T>& op, const Field<T>& u) {
    if (!(u.grid() == op.grid)) throw DimensionError("field grid does not match operator grid");
    Field<T> y(op.grid);
    affine_fused_apply(op, T(1), T(0), u.span(), y.span());
    return y;
}

template <class T>
StencilOperator<T> homogeneous_part(const StencilOperator<T>& op) {
    StencilOperator<T> h = op;
    if (!op.bc.is_linear()) h.bc = BoundaryCondition::homogeneous();
    return h;
}

template <class T>
Field<T> boundary_source(const StencilOperator<T>& op) {
    Field<T> zero(op.grid);
    if (op.bc.is_linear()) return zero;
    return expint::apply(op, zero);
}

template <class T>
std::pair<Field<T>, Field<T>> apply_affine_split(const StencilOperator<T>& op, const Field<T>& u) {
    if (op.bc.kind() != BoundaryCondition::Kind::dirichlet_function) {
        throw BoundaryKindError("apply_affine_split requires a Dirichlet boundary function");
    }
    if (!(u.grid() == op.grid)) throw DimensionError("field grid does not match operator grid");
    return {fused_apply(homogeneous_part(op), T(1), T(0), u), boundary_source(op)};
}

#define EXPINT_INSTANTIATE_STENCIL(T)                                                            \
    template void apply_slab<T>(const StencilOperator<T>&, T, T, const T*, T*, int, int, const T*, \
                                const T*);                                                       \
    template void affine_fused_apply<T>(const StencilOperator<T>&, T, T, std::span<const T>,      \
                                        std::span<T>);                                           \
    template void fused_apply<T>(const StencilOperator<T>&, T, T, std::span<const T>,             \
                                 std::span<T>);                                                  \
    template Field<T> fused_apply<T>(const StencilOperator<T>&, T, T, const Field<T>&);           \
    template Field<T> apply<T>(const StencilOperator<T>&, const Field<T>&);                       \
    template StencilOperator<T> homogeneous_part<T>(const StencilOperator<T>&);                   \
    template Field<T> boundary_source<T>(const StencilOperator<T>&);                              \
    template std::pair<Field<T>, Field<T>> apply_affine_split<T>(const StencilOperator<T>&,       \
                                                                 const Field<T>&);

EXPINT_INSTANTIATE_STENCIL(float)
EXPINT_INSTANTIATE_STENCIL(double)
EXPINT_INSTANTIATE_STENCIL(std::complex<double>)

#undef EXPINT_INSTANTIATE_STENCIL

} // namespace expint
