#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "expint/grid.hpp"

namespace expint {

using ScalarFunction = std::function<double(double, double, double)>;

enum class Traversal { naive, tiled };

std::string to_string(Traversal t);
Traversal parse_traversal(const std::string& s);

/// Dirichlet data on the boundary of the unit cube.
///
/// `none` is periodic wraparound and exists for kernel benchmarking only.
class BoundaryCondition {
public:
    enum class Kind { none, homogeneous_dirichlet, dirichlet_function };

    static BoundaryCondition periodic() { return BoundaryCondition(Kind::none, {}, "none"); }
    static BoundaryCondition homogeneous() {
        return BoundaryCondition(Kind::homogeneous_dirichlet, {}, "homogeneous");
    }
    static BoundaryCondition function(ScalarFunction f, std::string label) {
        return BoundaryCondition(Kind::dirichlet_function, std::move(f), std::move(label));
    }

    Kind kind() const noexcept { return kind_; }
    const ScalarFunction& function() const noexcept { return f_; }
    const std::string& label() const noexcept { return label_; }
    /// Only dirichlet_function makes the stencil affine rather than linear.
    bool is_linear() const noexcept { return kind_ != Kind::dirichlet_function; }

private:
    BoundaryCondition(Kind k, ScalarFunction f, std::string label)
        : kind_(k), f_(std::move(f)), label_(std::move(label)) {}

    Kind kind_;
    ScalarFunction f_;
    std::string label_;
};

/// Position-dependent factor D applied at the output point.
struct Coefficient {
    ScalarFunction fn;
    int flops = 0; // declared per-point cost, used for throughput accounting
    std::string label;
};

/// D(x,y,z) = 1/sqrt(1 + x^2 + y^2), declared as 6 flops.
Coefficient inverse_radial_diffusion();

struct TileShape {
    int x = 64;
    int y = 8;
};

/// Matrix-free A = -Delta_h (seven-point), optionally premultiplied by D.
///
/// Per output point the isotropic kernel computes (6u - sum of neighbours)/dx^2,
/// anisotropic grids use per-axis factors. Both traversals evaluate the same
/// expression per point, so their outputs agree bitwise.
template <class T>
struct StencilOperator {
    Grid3D grid;
    BoundaryCondition bc = BoundaryCondition::homogeneous();
    std::optional<Coefficient> coeff{};
    Traversal traversal = Traversal::naive;
    TileShape tile{};
    int threads = 1;
};

/// A u, boundary values taken inline.
template <class T>
Field<T> apply(const StencilOperator<T>& op, const Field<T>& u);

/// (A_hom u, b) with apply(op, u) = A_hom u + b. Requires dirichlet_function.
template <class T>
std::pair<Field<T>, Field<T>> apply_affine_split(const StencilOperator<T>& op, const Field<T>& u);

/// (alpha A + beta I) x in one sweep. Requires a linear boundary kind.
template <class T>
Field<T> fused_apply(const StencilOperator<T>& op, T alpha, T beta, const Field<T>& x);

template <class T>
void fused_apply(const StencilOperator<T>& op, T alpha, T beta, std::span<const T> x,
                 std::span<T> y);

/// alpha (A x + b) + beta x in one sweep, for any boundary kind.
template <class T>
void affine_fused_apply(const StencilOperator<T>& op, T alpha, T beta, std::span<const T> x,
                        std::span<T> y);

/// The constant boundary contribution b (zero for linear boundary kinds).
template <class T>
Field<T> boundary_source(const StencilOperator<T>& op);

/// Same operator with homogeneous Dirichlet data in place of a boundary function.
template <class T>
StencilOperator<T> homogeneous_part(const StencilOperator<T>& op);

/// Sweeps z-planes [z_lo, z_hi) of the global vectors x and y.
///
/// `below` and `above` hold the planes z_lo-1 and z_hi; nullptr selects the
/// physical boundary and is only valid at z_lo == 0 / z_hi == nz. Used by the
/// slab decomposition, where these planes come from halo buffers.
template <class T>
void apply_slab(const StencilOperator<T>& op, T alpha, T beta, const T* x, T* y, int z_lo,
                int z_hi, const T* below, const T* above);

} // namespace expint
