#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "expint/sparse.hpp"
#include "expint/stencil.hpp"

namespace expint {

enum class SpectralAxis { real, imaginary };

/// Segment [a, b] on the real axis, or i*[a, b] on the imaginary axis,
/// enclosing the spectrum of an operator.
struct SpectralInterval {
    double a = 0.0;
    double b = 0.0;
    SpectralAxis axis = SpectralAxis::real;

    double center() const noexcept { return 0.5 * (a + b); }
    double width() const noexcept { return b - a; }
    SpectralInterval widened(double by) const { return {a - by, b + by, axis}; }
    bool contains(double x) const noexcept { return a <= x && x <= b; }
};

/// Operator handle used by the matrix-function and integrator layers.
///
/// Everything they need reduces to the fused product (alpha A + beta I) x.
template <class T>
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t size() const = 0;
    virtual void fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const = 0;
    virtual SpectralInterval spectral_interval() const = 0;

    /// Runs `fn` over disjoint index blocks covering [0, size()). Partitioned
    /// operators run one block per worker; the default is a single block.
    virtual void for_each_block(const std::function<void(std::size_t, std::size_t)>& fn) const {
        fn(0, size());
    }
};

template <class T>
SpectralInterval gershgorin_interval(const StencilOperator<T>& op);

/// Real-axis disks for real matrices; complex matrices that are exactly
/// skew-Hermitian get the imaginary-axis interval.
template <class T>
SpectralInterval gershgorin_interval(const CsrMatrix<T>& A);

template <class T>
SpectralInterval gershgorin_interval(const CsrMatrix<T>& A, SpectralAxis axis);

template <class T>
bool is_skew_hermitian(const CsrMatrix<T>& A);
template <class T>
bool is_hermitian(const CsrMatrix<T>& A);

/// Matrix-free stencil as an operator handle. The boundary kind must be linear.
template <class T>
class StencilLinearOperator final : public LinearOperator<T> {
public:
    explicit StencilLinearOperator(StencilOperator<T> op) : op_(std::move(op)) {
        if (!op_.bc.is_linear()) {
            throw BoundaryKindError("operator handle needs a linear boundary kind; use homogeneous_part");
        }
    }
    std::size_t size() const override { return op_.grid.size(); }
    void fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const override {
        expint::fused_apply(op_, alpha, beta, x, y);
    }
    SpectralInterval spectral_interval() const override { return gershgorin_interval(op_); }
    const StencilOperator<T>& stencil() const noexcept { return op_; }

private:
    StencilOperator<T> op_;
};

template <class T>
class CsrLinearOperator final : public LinearOperator<T> {
public:
    explicit CsrLinearOperator(std::shared_ptr<const CsrMatrix<T>> A) : A_(std::move(A)) {
        if (!A_->square()) throw DimensionError("operator handle needs a square matrix");
    }
    explicit CsrLinearOperator(CsrMatrix<T> A)
        : CsrLinearOperator(std::make_shared<const CsrMatrix<T>>(std::move(A))) {}

    std::size_t size() const override { return A_->nrows(); }
    void fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const override {
        expint::fused_spmv(*A_, alpha, beta, x, y);
    }
    SpectralInterval spectral_interval() const override { return gershgorin_interval(*A_); }
    const CsrMatrix<T>& matrix() const noexcept { return *A_; }

private:
    std::shared_ptr<const CsrMatrix<T>> A_;
};

} // namespace expint
