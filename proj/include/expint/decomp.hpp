#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "expint/matfunc.hpp"

namespace expint {

enum class PartitionMode { stencil_slab, csr_rows };

struct Slab {
    std::size_t lo = 0; // z-plane (stencil) or row (CSR)
    std::size_t hi = 0;
    std::size_t size() const noexcept { return hi - lo; }
};

struct Partition {
    PartitionMode mode = PartitionMode::stencil_slab;
    int m = 1;
    std::vector<Slab> slabs;
    std::size_t unit = 1;       // scalars per slab unit: nx*ny for stencil, 1 for CSR
    std::size_t halo_width = 1; // planes per interface side (stencil) or n (CSR)

    std::size_t size() const noexcept { return slabs.empty() ? 0 : slabs.back().hi * unit; }
};

/// Balanced z-slabs; sizes differ by at most one plane, larger slabs first.
Partition make_partition(const Grid3D& g, int m);
/// Balanced contiguous row blocks.
Partition make_partition(std::size_t nrows, int m);

/// Scalars copied between workers, one record per partitioned apply.
class TransferLedger {
public:
    void record(std::uint64_t scalars, std::uint64_t scalar_bytes);
    std::size_t applies() const noexcept { return scalars_.size(); }
    std::uint64_t last() const noexcept { return scalars_.empty() ? 0 : scalars_.back(); }
    std::uint64_t total_scalars() const noexcept { return total_scalars_; }
    std::uint64_t total_bytes() const noexcept { return total_bytes_; }
    std::span<const std::uint64_t> per_apply() const noexcept { return scalars_; }
    void clear();

    /// Columns: apply, scalars_moved, cumulative_bytes.
    void write_csv(std::ostream& os) const;
    void write_csv(const std::filesystem::path& path) const;

private:
    std::vector<std::uint64_t> scalars_;
    std::vector<std::uint64_t> cumulative_bytes_;
    std::uint64_t total_scalars_ = 0;
    std::uint64_t total_bytes_ = 0;
};

/// Fixed set of worker threads executing one job at a time.
///
/// run() returns once every worker has finished, so consecutive calls act as
/// superstep barriers. An exception from any worker is rethrown on the caller;
/// the lowest worker index wins.
class WorkerPool {
public:
    explicit WorkerPool(int m);
    ~WorkerPool();
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int size() const noexcept { return m_; }
    void run(const std::function<void(int)>& job);

private:
    void loop(int w);

    int m_;
    std::mutex mu_;
    std::condition_variable start_;
    std::condition_variable done_;
    const std::function<void(int)>* job_ = nullptr;
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    std::vector<std::exception_ptr> errors_;
    std::vector<std::jthread> threads_;
};

/// Slab-decomposed stencil. Each worker reads its own planes of x plus two
/// halo buffers filled in a separate exchange superstep.
///
/// Not safe for concurrent fused_apply calls on one instance.
template <class T>
class PartitionedStencil final : public LinearOperator<T> {
public:
    PartitionedStencil(StencilOperator<T> op, int m, std::shared_ptr<TransferLedger> ledger = nullptr);

    std::size_t size() const override { return op_.grid.size(); }
    void fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const override;
    SpectralInterval spectral_interval() const override { return gershgorin_interval(op_); }
    void for_each_block(const std::function<void(std::size_t, std::size_t)>& fn) const override;

    const Partition& partition() const noexcept { return part_; }
    TransferLedger& ledger() const noexcept { return *ledger_; }
    /// Scalars moved by one apply.
    std::uint64_t scalars_per_apply() const noexcept;

private:
    StencilOperator<T> op_;
    Partition part_;
    std::shared_ptr<TransferLedger> ledger_;
    std::unique_ptr<WorkerPool> pool_;
    bool periodic_;
    mutable std::vector<std::vector<T>> below_, above_;
};

/// Row-block CSR with dense coupling: every worker receives the full remote
/// part of x before each product.
template <class T>
class PartitionedCsr final : public LinearOperator<T> {
public:
    PartitionedCsr(std::shared_ptr<const CsrMatrix<T>> A, int m,
                   std::shared_ptr<TransferLedger> ledger = nullptr);

    std::size_t size() const override { return A_->nrows(); }
    void fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const override;
    SpectralInterval spectral_interval() const override { return gershgorin_interval(*A_); }
    void for_each_block(const std::function<void(std::size_t, std::size_t)>& fn) const override;

    const Partition& partition() const noexcept { return part_; }
    TransferLedger& ledger() const noexcept { return *ledger_; }
    std::uint64_t scalars_per_apply() const noexcept;

private:
    std::shared_ptr<const CsrMatrix<T>> A_;
    Partition part_;
    std::shared_ptr<TransferLedger> ledger_;
    std::unique_ptr<WorkerPool> pool_;
    mutable std::vector<std::vector<T>> local_x_;
};

/// Analytic halo traffic per apply.
std::uint64_t stencil_halo_scalars(const Grid3D& g, int m, bool periodic = false);
std::uint64_t csr_dense_coupling_scalars(std::uint64_t n, int m);

/// One partitioned (alpha A + beta I) x with a temporary worker pool.
template <class T>
std::vector<T> partitioned_apply(const StencilOperator<T>& op, int m, std::span<const T> x,
                                 TransferLedger& ledger, T alpha = T(1), T beta = T(0));
template <class T>
std::vector<T> partitioned_apply(const CsrMatrix<T>& A, int m, std::span<const T> x,
                                 TransferLedger& ledger, T alpha = T(1), T beta = T(0));

/// newton_apply with every product and pointwise update running on the partition.
template <class T>
NewtonResult<T> partitioned_newton_apply(const LinearOperator<T>& partitioned, const LejaInterpolant& ip,
                                         std::span<const T> v, double tol) {
    return newton_apply(partitioned, ip, v, tol);
}

} // namespace expint
