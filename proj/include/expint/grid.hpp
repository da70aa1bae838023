#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "expint/errors.hpp"

namespace expint {

/// Interior-point grid on the unit cube [0,1]^3.
///
/// Unknowns sit at x = (ix+1)*hx for 0 <= ix < nx, so the spacing along an
/// axis with n interior points is 1/(n+1). Boundary values live on the
/// (implicit) ghost layer at coordinate 0 and 1.
///
/// An axis with a single point is *collapsed* when the grid has more than one
/// point: stencils ignore it, which is how 1D and 2D problems are embedded
/// (e.g. 31x1x1 is the 1D three-point Laplacian).
class Grid3D {
public:
    Grid3D(int nx, int ny, int nz);
    static Grid3D cube(int n) { return Grid3D(n, n, n); }

    int nx() const noexcept { return n_[0]; }
    int ny() const noexcept { return n_[1]; }
    int nz() const noexcept { return n_[2]; }
    int extent(int axis) const noexcept { return n_[axis]; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
    }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(n_[0]) * n_[1]; }

    /// Grid spacing along `axis` (0 = x, 1 = y, 2 = z).
    double spacing(int axis) const noexcept { return h_[axis]; }
    double dx() const noexcept { return h_[0]; }

    /// Physical coordinate of interior index `i` along `axis`.
    double coord(int axis, int i) const noexcept { return (i + 1) * h_[axis]; }

    bool collapsed(int axis) const noexcept { return n_[axis] == 1 && size() > 1; }

    /// True when all three axes are active and share one spacing.
    bool isotropic() const noexcept { return n_[0] == n_[1] && n_[1] == n_[2]; }

    bool operator==(const Grid3D&) const = default;

private:
    std::array<int, 3> n_;
    std::array<double, 3> h_;
};

/// x-fastest linear index; throws IndexError outside the grid.
std::size_t linear_index(const Grid3D& g, int ix, int iy, int iz);

/// Inverse of linear_index.
std::array<int, 3> index_triple(const Grid3D& g, std::size_t i);

enum class ScalarKind : std::uint8_t { f32 = 1, f64 = 2, c128 = 3 };

template <class T>
constexpr ScalarKind scalar_kind_of() {
    if constexpr (std::is_same_v<T, float>) {
        return ScalarKind::f32;
    } else if constexpr (std::is_same_v<T, double>) {
        return ScalarKind::f64;
    } else {
        static_assert(std::is_same_v<T, std::complex<double>>, "unsupported scalar");
        return ScalarKind::c128;
    }
}

std::string to_string(ScalarKind k);
ScalarKind parse_scalar_kind(const std::string& s);

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Values of one scalar kind bound to a grid.
template <class T>
class Field {
public:
    using value_type = T;

    explicit Field(const Grid3D& g) : grid_(g), values_(g.size(), T{}) {}
    Field(const Grid3D& g, T fill) : grid_(g), values_(g.size(), fill) {}
    Field(const Grid3D& g, std::vector<T> values) : grid_(g), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw DimensionError("field length " + std::to_string(values_.size()) +
                                 " does not match grid size " + std::to_string(grid_.size()));
        }
    }

    const Grid3D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }
    T& at(int ix, int iy, int iz) { return values_[linear_index(grid_, ix, iy, iz)]; }
    const T& at(int ix, int iy, int iz) const { return values_[linear_index(grid_, ix, iy, iz)]; }

    std::span<T> span() noexcept { return values_; }
    std::span<const T> span() const noexcept { return values_; }
    std::vector<T>& values() noexcept { return values_; }
    const std::vector<T>& values() const noexcept { return values_; }

    bool all_finite() const {
        for (const T& v : values_) {
            if constexpr (is_complex_v<T>) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
            } else {
                if (!std::isfinite(v)) return false;
            }
        }
        return true;
    }

private:
    Grid3D grid_;
    std::vector<T> values_;
};

namespace detail {
[[noreturn]] void throw_nonfinite_eval(const Grid3D& g, std::size_t i);
}

/// Samples f(x,y,z) at every interior point.
template <class T = double, class F>
Field<T> eval_on_grid(const Grid3D& g, F&& f) {
    Field<T> out(g);
    std::size_t i = 0;
    for (int iz = 0; iz < g.nz(); ++iz) {
        const double z = g.coord(2, iz);
        for (int iy = 0; iy < g.ny(); ++iy) {
            const double y = g.coord(1, iy);
            for (int ix = 0; ix < g.nx(); ++ix, ++i) {
                const auto v = f(g.coord(0, ix), y, z);
                bool finite;
                if constexpr (is_complex_v<std::decay_t<decltype(v)>>) {
                    finite = std::isfinite(v.real()) && std::isfinite(v.imag());
                } else {
                    finite = std::isfinite(v);
                }
                if (!finite) detail::throw_nonfinite_eval(g, i);
                out[i] = static_cast<T>(v);
            }
        }
    }
    return out;
}

// Binary layout: nx, ny, nz as little-endian u64, one u8 scalar kind, then
// the values little-endian (complex as re, im pairs).
template <class T>
void write_field_binary(const Field<T>& f, const std::filesystem::path& path);
template <class T>
Field<T> read_field_binary(const std::filesystem::path& path);
/// Scalar kind stored in a binary field file header.
ScalarKind peek_field_kind(const std::filesystem::path& path);

// CSV with header "index,value" (complex: "index,re,im").
template <class T>
void write_field_csv(const Field<T>& f, const std::filesystem::path& path);
template <class T>
std::vector<T> read_field_csv(const std::filesystem::path& path);

} // namespace expint
