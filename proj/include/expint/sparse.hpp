#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "expint/errors.hpp"
#include "expint/stencil.hpp"

namespace expint {

template <class T, class I = std::int32_t>
struct Triplet {
    I row;
    I col;
    T value;
};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row. `I` is the index
/// type for both row pointers and column indices; the default 32-bit width
/// covers every matrix with fewer than 2^31 rows and nonzeros.
template <class T, class I = std::int32_t>
class CsrMatrix {
public:
    using value_type = T;
    using index_type = I;

    CsrMatrix() = default;

    CsrMatrix(std::size_t nrows, std::size_t ncols, std::vector<I> row_ptr, std::vector<I> col_idx,
              std::vector<T> vals)
        : nrows_(nrows), ncols_(ncols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
          vals_(std::move(vals)) {
        validate();
    }

    /// Builds from unordered triplets; a repeated (row, col) pair is an error.
    static CsrMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                   std::vector<Triplet<T, I>> entries) {
        check_index_width(nrows, ncols, entries.size());
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<I> row_ptr(nrows + 1, 0);
        std::vector<I> col_idx;
        std::vector<T> vals;
        col_idx.reserve(entries.size());
        vals.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto& e = entries[k];
            if (e.row < 0 || static_cast<std::size_t>(e.row) >= nrows || e.col < 0 ||
                static_cast<std::size_t>(e.col) >= ncols) {
                throw IndexError("triplet (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                                 ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
            }
            if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
                throw DimensionError("duplicate entry (" + std::to_string(e.row) + "," +
                                     std::to_string(e.col) + ")");
            }
            ++row_ptr[static_cast<std::size_t>(e.row) + 1];
            col_idx.push_back(e.col);
            vals.push_back(e.value);
        }
        for (std::size_t r = 0; r < nrows; ++r) row_ptr[r + 1] += row_ptr[r];
        return CsrMatrix(nrows, ncols, std::move(row_ptr), std::move(col_idx), std::move(vals));
    }

    static CsrMatrix identity(std::size_t n) {
        std::vector<I> rp(n + 1), ci(n);
        for (std::size_t i = 0; i <= n; ++i) rp[i] = static_cast<I>(i);
        for (std::size_t i = 0; i < n; ++i) ci[i] = static_cast<I>(i);
        return CsrMatrix(n, n, std::move(rp), std::move(ci), std::vector<T>(n, T(1)));
    }

    std::size_t nrows() const noexcept { return nrows_; }
    std::size_t ncols() const noexcept { return ncols_; }
    std::size_t nnz() const noexcept { return vals_.size(); }
    bool square() const noexcept { return nrows_ == ncols_; }

    std::span<const I> row_ptr() const noexcept { return row_ptr_; }
    std::span<const I> col_idx() const noexcept { return col_idx_; }
    std::span<const T> values() const noexcept { return vals_; }

    /// Stored value at (r, c), or zero.
    T coeff(std::size_t r, std::size_t c) const {
        const auto b = col_idx_.begin() + row_ptr_[r];
        const auto e = col_idx_.begin() + row_ptr_[r + 1];
        const auto it = std::lower_bound(b, e, static_cast<I>(c));
        return (it != e && static_cast<std::size_t>(*it) == c) ? vals_[it - col_idx_.begin()] : T{};
    }

    /// Worker threads used by spmv; results do not depend on this value.
    int threads = 1;

    static void check_index_width(std::size_t nrows, std::size_t ncols, std::size_t nnz) {
        const auto lim = static_cast<std::size_t>(std::numeric_limits<I>::max());
        if (nrows >= lim || ncols >= lim || nnz > lim) {
            throw SizeLimitError("matrix too large for a " + std::to_string(sizeof(I) * 8) +
                                 "-bit index; use a 64-bit CsrMatrix");
        }
    }

private:
    void validate() const {
        check_index_width(nrows_, ncols_, vals_.size());
        if (row_ptr_.size() != nrows_ + 1) throw DimensionError("row_ptr must have nrows+1 entries");
        if (col_idx_.size() != vals_.size()) throw DimensionError("col_idx and values differ in length");
        if (row_ptr_.front() != 0 || static_cast<std::size_t>(row_ptr_.back()) != vals_.size()) {
            throw DimensionError("row_ptr must start at 0 and end at nnz");
        }
        for (std::size_t r = 0; r < nrows_; ++r) {
            if (row_ptr_[r + 1] < row_ptr_[r]) throw DimensionError("row_ptr must be nondecreasing");
            for (I k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                if (col_idx_[k] < 0 || static_cast<std::size_t>(col_idx_[k]) >= ncols_) {
                    throw IndexError("column index " + std::to_string(col_idx_[k]) + " out of range in row " +
                                     std::to_string(r));
                }
                if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1]) {
                    throw DimensionError("column indices must be strictly increasing in row " +
                                         std::to_string(r));
                }
            }
        }
    }

    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<I> row_ptr_{0};
    std::vector<I> col_idx_;
    std::vector<T> vals_;
};

namespace detail {

template <class F>
void for_row_chunks(std::size_t nrows, int threads, F&& body) {
    const int workers = static_cast<int>(std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1,
                                                                 std::max<std::size_t>(nrows, 1)));
    if (workers == 1) {
        body(std::size_t{0}, nrows);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = nrows * w / workers, hi = nrows * (w + 1) / workers;
            pool.emplace_back([&, w, lo, hi] {
                try {
                    body(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// y[r] = alpha * (A x)[r] + beta * x[r] for rows [lo, hi); summation in stored order.
template <class T, class I>
void fused_spmv_rows(const CsrMatrix<T, I>& A, T alpha, T beta, const T* x, T* y, std::size_t lo,
                     std::size_t hi) {
    const auto rp = A.row_ptr();
    const auto ci = A.col_idx();
    const auto va = A.values();
    const bool scale = alpha != T(1);
    const bool shift = beta != T{};
    for (std::size_t r = lo; r < hi; ++r) {
        T sum{};
        for (I k = rp[r]; k < rp[r + 1]; ++k) sum += va[k] * x[ci[k]];
        if (scale) sum = alpha * sum;
        if (shift) sum = sum + beta * x[r];
        y[r] = sum;
    }
}

template <class T, class I>
void spmv(const CsrMatrix<T, I>& A, std::span<const T> x, std::span<T> y) {
    if (x.size() != A.ncols() || y.size() != A.nrows()) {
        throw DimensionError("spmv: x has " + std::to_string(x.size()) + " entries, matrix is " +
                             std::to_string(A.nrows()) + "x" + std::to_string(A.ncols()));
    }
    detail::for_row_chunks(A.nrows(), A.threads, [&](std::size_t lo, std::size_t hi) {
        fused_spmv_rows(A, T(1), T(0), x.data(), y.data(), lo, hi);
    });
}

template <class T, class I>
std::vector<T> spmv(const CsrMatrix<T, I>& A, std::span<const T> x) {
    std::vector<T> y(A.nrows());
    spmv(A, x, std::span<T>(y));
    return y;
}

template <class T, class I>
std::vector<T> spmv(const CsrMatrix<T, I>& A, const std::vector<T>& x) {
    return spmv(A, std::span<const T>(x));
}

/// alpha A x + beta x in a single pass over A.
template <class T, class I>
void fused_spmv(const CsrMatrix<T, I>& A, T alpha, T beta, std::span<const T> x, std::span<T> y) {
    if (!A.square()) throw DimensionError("fused_spmv needs a square matrix");
    if (x.size() != A.ncols() || y.size() != A.nrows()) {
        throw DimensionError("fused_spmv: vector length " + std::to_string(x.size()) +
                             " does not match n = " + std::to_string(A.nrows()));
    }
    detail::for_row_chunks(A.nrows(), A.threads, [&](std::size_t lo, std::size_t hi) {
        fused_spmv_rows(A, alpha, beta, x.data(), y.data(), lo, hi);
    });
}

template <class T, class I>
std::vector<T> fused_spmv(const CsrMatrix<T, I>& A, T alpha, T beta, std::span<const T> x) {
    std::vector<T> y(A.nrows());
    fused_spmv(A, alpha, beta, x, std::span<T>(y));
    return y;
}

template <class T, class I>
std::vector<T> fused_spmv(const CsrMatrix<T, I>& A, T alpha, T beta, const std::vector<T>& x) {
    return fused_spmv(A, alpha, beta, std::span<const T>(x));
}

/// Storage of a CSR matrix: values, column indices and row pointers.
constexpr std::uint64_t csr_memory_bytes(std::uint64_t nnz, std::uint64_t nrows,
                                         std::uint64_t value_bytes, std::uint64_t index_bytes) {
    return value_bytes * nnz + index_bytes * nnz + index_bytes * (nrows + 1);
}

/// Nonzeros of the assembled seven-point stencil with Dirichlet data on an
/// n^3 grid: 7 per row minus the couplings that leave the domain.
constexpr std::uint64_t stencil_nnz_dirichlet(std::uint64_t n) {
    return 7 * n * n * n - 6 * n * n;
}

/// Assembled form (A, b) of a stencil operator: apply(op, u) = A u + b.
/// Guarded to n <= 2^22 points.
template <class T>
std::pair<CsrMatrix<T>, std::vector<T>> assemble_stencil(const StencilOperator<T>& op);

inline constexpr std::size_t assemble_limit = std::size_t{1} << 22;

} // namespace expint
