#include "expint/decomp.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

namespace expint {

namespace {

std::vector<Slab> balanced(std::size_t n, int m) {
    std::vector<Slab> slabs(static_cast<std::size_t>(m));
    const std::size_t base = n / static_cast<std::size_t>(m);
    const std::size_t extra = n % static_cast<std::size_t>(m);
    std::size_t lo = 0;
    for (std::size_t w = 0; w < slabs.size(); ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        slabs[w] = {lo, lo + len};
        lo += len;
    }
    return slabs;
}

} // namespace

Partition make_partition(const Grid3D& g, int m) {
    if (m < 1) throw ConfigError("worker count must be at least 1");
    if (static_cast<std::size_t>(m) > static_cast<std::size_t>(g.nz())) {
        throw ConfigError("cannot split " + std::to_string(g.nz()) + " z-planes over " +
                          std::to_string(m) + " workers");
    }
    Partition p;
    p.mode = PartitionMode::stencil_slab;
    p.m = m;
    p.slabs = balanced(static_cast<std::size_t>(g.nz()), m);
    p.unit = g.plane_size();
    p.halo_width = 1;
    return p;
}

Partition make_partition(std::size_t nrows, int m) {
    if (m < 1) throw ConfigError("worker count must be at least 1");
    if (static_cast<std::size_t>(m) > nrows) {
        throw ConfigError("cannot split " + std::to_string(nrows) + " rows over " + std::to_string(m) +
                          " workers");
    }
    Partition p;
    p.mode = PartitionMode::csr_rows;
    p.m = m;
    p.slabs = balanced(nrows, m);
    p.unit = 1;
    p.halo_width = nrows;
    return p;
}

std::uint64_t stencil_halo_scalars(const Grid3D& g, int m, bool periodic) {
    const std::uint64_t plane = g.plane_size();
    std::uint64_t s = 2 * static_cast<std::uint64_t>(m - 1) * plane;
    if (periodic && m >= 2) s += 2 * plane;
    return s;
}

std::uint64_t csr_dense_coupling_scalars(std::uint64_t n, int m) {
    return static_cast<std::uint64_t>(m - 1) * n;
}

// ---------------------------------------------------------------------------

void TransferLedger::record(std::uint64_t scalars, std::uint64_t scalar_bytes) {
    scalars_.push_back(scalars);
    total_scalars_ += scalars;
    total_bytes_ += scalars * scalar_bytes;
    cumulative_bytes_.push_back(total_bytes_);
}

void TransferLedger::clear() {
    scalars_.clear();
    cumulative_bytes_.clear();
    total_scalars_ = 0;
    total_bytes_ = 0;
}

void TransferLedger::write_csv(std::ostream& os) const {
    os << "apply,scalars_moved,cumulative_bytes\n";
    for (std::size_t i = 0; i < scalars_.size(); ++i) {
        os << i << ',' << scalars_[i] << ',' << cumulative_bytes_[i] << '\n';
    }
}

void TransferLedger::write_csv(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_csv(os);
    if (!os) throw Error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

WorkerPool::WorkerPool(int m) : m_(m), errors_(static_cast<std::size_t>(std::max(m, 1))) {
    if (m < 1) throw ConfigError("worker pool needs at least one worker");
    threads_.reserve(static_cast<std::size_t>(m));
    for (int w = 0; w < m; ++w) threads_.emplace_back([this, w] { loop(w); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mu_);
        stop_ = true;
    }
    start_.notify_all();
}

void WorkerPool::loop(int w) {
    std::uint64_t seen = 0;
    for (;;) {
        const std::function<void(int)>* job = nullptr;
        {
            std::unique_lock lock(mu_);
            start_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            job = job_;
        }
        try {
            (*job)(w);
        } catch (...) {
            errors_[static_cast<std::size_t>(w)] = std::current_exception();
        }
        {
            std::lock_guard lock(mu_);
            if (--pending_ == 0) done_.notify_one();
        }
    }
}

void WorkerPool::run(const std::function<void(int)>& job) {
    {
        std::lock_guard lock(mu_);
        std::fill(errors_.begin(), errors_.end(), nullptr);
        job_ = &job;
        pending_ = m_;
        ++generation_;
    }
    start_.notify_all();
    {
        std::unique_lock lock(mu_);
        done_.wait(lock, [&] { return pending_ == 0; });
        job_ = nullptr;
    }
    for (auto& e : errors_) {
        if (e) std::rethrow_exception(e);
    }
}

// ---------------------------------------------------------------------------

template <class T>
PartitionedStencil<T>::PartitionedStencil(StencilOperator<T> op, int m, std::shared_ptr<TransferLedger> ledger)
    : op_(std::move(op)), part_(make_partition(op_.grid, m)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<TransferLedger>()),
      pool_(std::make_unique<WorkerPool>(m)),
      periodic_(op_.bc.kind() == BoundaryCondition::Kind::none) {
    if (!op_.bc.is_linear()) {
        throw BoundaryKindError("partitioned operator needs a linear boundary kind; use homogeneous_part");
    }
    const std::size_t plane = part_.unit;
    below_.assign(static_cast<std::size_t>(m), std::vector<T>(plane));
    above_.assign(static_cast<std::size_t>(m), std::vector<T>(plane));
}

template <class T>
std::uint64_t PartitionedStencil<T>::scalars_per_apply() const noexcept {
    return stencil_halo_scalars(op_.grid, part_.m, periodic_);
}

template <class T>
void PartitionedStencil<T>::fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const {
    const std::size_t n = size();
    if (x.size() != n || y.size() != n) {
        throw DimensionError("partitioned apply: vector length does not match the grid");
    }
    const int m = part_.m;
    const std::size_t plane = part_.unit;
    const auto nz = static_cast<std::size_t>(op_.grid.nz());

    // Exchange: each worker pushes its first and last plane to its neighbours.
    pool_->run([&](int w) {
        const Slab& s = part_.slabs[static_cast<std::size_t>(w)];
        const T* first = x.data() + s.lo * plane;
        const T* last = x.data() + (s.hi - 1) * plane;
        if (w > 0) {
            std::copy(first, first + plane, above_[static_cast<std::size_t>(w - 1)].begin());
        } else if (periodic_ && m > 1) {
            std::copy(first, first + plane, above_[static_cast<std::size_t>(m - 1)].begin());
        }
        if (w < m - 1) {
            std::copy(last, last + plane, below_[static_cast<std::size_t>(w + 1)].begin());
        } else if (periodic_ && m > 1) {
            std::copy(last, last + plane, below_[0].begin());
        }
    });
    ledger_->record(scalars_per_apply(), sizeof(T));

    pool_->run([&](int w) {
        const Slab& s = part_.slabs[static_cast<std::size_t>(w)];
        const T* below = nullptr;
        const T* above = nullptr;
        if (m == 1) {
            if (periodic_) {
                below = x.data() + (nz - 1) * plane;
                above = x.data();
            }
        } else {
            if (w > 0 || periodic_) below = below_[static_cast<std::size_t>(w)].data();
            if (w < m - 1 || periodic_) above = above_[static_cast<std::size_t>(w)].data();
        }
        apply_slab(op_, alpha, beta, x.data(), y.data(), static_cast<int>(s.lo), static_cast<int>(s.hi),
                   below, above);
    });
}

template <class T>
void PartitionedStencil<T>::for_each_block(const std::function<void(std::size_t, std::size_t)>& fn) const {
    pool_->run([&](int w) {
        const Slab& s = part_.slabs[static_cast<std::size_t>(w)];
        fn(s.lo * part_.unit, s.hi * part_.unit);
    });
}

// ---------------------------------------------------------------------------

template <class T>
PartitionedCsr<T>::PartitionedCsr(std::shared_ptr<const CsrMatrix<T>> A, int m,
                                  std::shared_ptr<TransferLedger> ledger)
    : A_(std::move(A)), part_(make_partition(A_->nrows(), m)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<TransferLedger>()),
      pool_(std::make_unique<WorkerPool>(m)) {
    if (!A_->square()) throw DimensionError("partitioned CSR operator needs a square matrix");
    local_x_.assign(static_cast<std::size_t>(m), std::vector<T>(A_->nrows()));
}

template <class T>
std::uint64_t PartitionedCsr<T>::scalars_per_apply() const noexcept {
    return csr_dense_coupling_scalars(A_->nrows(), part_.m);
}

template <class T>
void PartitionedCsr<T>::fused_apply(T alpha, T beta, std::span<const T> x, std::span<T> y) const {
    const std::size_t n = size();
    if (x.size() != n || y.size() != n) {
        throw DimensionError("partitioned apply: vector length does not match the matrix");
    }
    // Exchange: each worker broadcasts its owned segment to every worker's copy.
    pool_->run([&](int w) {
        const Slab& s = part_.slabs[static_cast<std::size_t>(w)];
        for (auto& dst : local_x_) {
            std::copy(x.begin() + static_cast<std::ptrdiff_t>(s.lo), x.begin() + static_cast<std::ptrdiff_t>(s.hi),
                      dst.begin() + static_cast<std::ptrdiff_t>(s.lo));
        }
    });
    ledger_->record(scalars_per_apply(), sizeof(T));

    pool_->run([&](int w) {
        const Slab& s = part_.slabs[static_cast<std::size_t>(w)];
        fused_spmv_rows(*A_, alpha, beta, local_x_[static_cast<std::size_t>(w)].data(), y.data(), s.lo, s.hi);
    });
}

template <class T>
void PartitionedCsr<T>::for_each_block(const std::function<void(std::size_t, std::size_t)>& fn) const {
    pool_->run([&](int w) {
        const Slab& s = part_.slabs[static_cast<std::size_t>(w)];
        fn(s.lo, s.hi);
    });
}

// ---------------------------------------------------------------------------

template <class T>
std::vector<T> partitioned_apply(const StencilOperator<T>& op, int m, std::span<const T> x,
                                 TransferLedger& ledger, T alpha, T beta) {
    PartitionedStencil<T> P(op, m, std::shared_ptr<TransferLedger>(&ledger, [](TransferLedger*) {}));
    std::vector<T> y(P.size());
    P.fused_apply(alpha, beta, x, std::span<T>(y));
    return y;
}

template <class T>
std::vector<T> partitioned_apply(const CsrMatrix<T>& A, int m, std::span<const T> x, TransferLedger& ledger,
                                 T alpha, T beta) {
    auto shared = std::shared_ptr<const CsrMatrix<T>>(&A, [](const CsrMatrix<T>*) {});
    PartitionedCsr<T> P(shared, m, std::shared_ptr<TransferLedger>(&ledger, [](TransferLedger*) {}));
    std::vector<T> y(P.size());
    P.fused_apply(alpha, beta, x, std::span<T>(y));
    return y;
}

#define EXPINT_INSTANTIATE_DECOMP(T)                                                                  \
    template class PartitionedStencil<T>;                                                             \
    template class PartitionedCsr<T>;                                                                 \
    template std::vector<T> partitioned_apply<T>(const StencilOperator<T>&, int, std::span<const T>,  \
                                                 TransferLedger&, T, T);                              \
    template std::vector<T> partitioned_apply<T>(const CsrMatrix<T>&, int, std::span<const T>,        \
                                                 TransferLedger&, T, T);

EXPINT_INSTANTIATE_DECOMP(float)
EXPINT_INSTANTIATE_DECOMP(double)
EXPINT_INSTANTIATE_DECOMP(std::complex<double>)

#undef EXPINT_INSTANTIATE_DECOMP

} // namespace expint
