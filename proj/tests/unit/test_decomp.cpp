#include <doctest.h>

#include <chrono>
#include <cstring>
#include <random>
#include <sstream>

#include "expint/decomp.hpp"
#include "expint/integrator.hpp"
#include "oracles.hpp"

using namespace expint;

namespace {

template <class T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

std::vector<std::size_t> slab_sizes(const Partition& p) {
    std::vector<std::size_t> s;
    for (const auto& slab : p.slabs) s.push_back(slab.size());
    return s;
}

} // namespace

TEST_CASE("balanced slab partitions") {
    CHECK(slab_sizes(make_partition(Grid3D(8, 8, 256), 4)) == std::vector<std::size_t>{64, 64, 64, 64});
    CHECK(slab_sizes(make_partition(Grid3D(3, 3, 10), 4)) == std::vector<std::size_t>{3, 3, 2, 2});
    const auto p = make_partition(Grid3D(5, 4, 7), 3);
    CHECK(p.unit == 20);
    CHECK(p.size() == 140);
    CHECK(p.slabs.front().lo == 0);
    for (std::size_t w = 1; w < p.slabs.size(); ++w) CHECK(p.slabs[w].lo == p.slabs[w - 1].hi);
    CHECK(slab_sizes(make_partition(Grid3D(5, 4, 7), 1)) == std::vector<std::size_t>{7});
    CHECK(slab_sizes(make_partition(std::size_t{11}, 3)) == std::vector<std::size_t>{4, 4, 3});

    CHECK_THROWS_AS(make_partition(Grid3D(4, 4, 4), 0), ConfigError);
    CHECK_THROWS_AS(make_partition(Grid3D(4, 4, 4), 5), ConfigError);
    CHECK_THROWS_AS(make_partition(std::size_t{3}, 4), ConfigError);
}

TEST_CASE("single worker moves nothing and matches the serial operator") {
    const Grid3D g(9, 7, 5);
    const StencilOperator<double> op{g};
    const auto x = random_vector(g.size(), 1);
    TransferLedger ledger;
    const auto y = partitioned_apply(op, 1, std::span<const double>(x), ledger);
    CHECK(ledger.applies() == 1);
    CHECK(ledger.last() == 0);
    CHECK(bitwise_equal(y, apply(op, Field<double>(g, x)).values()));
}

TEST_CASE("16^3 over four workers: bitwise result and 1536 scalars per apply") {
    const Grid3D g = Grid3D::cube(16);
    const StencilOperator<double> op{g};
    const auto x = random_vector(g.size(), 2);
    const auto ref = apply(op, Field<double>(g, x)).values();
    TransferLedger ledger;
    const auto y = partitioned_apply(op, 4, std::span<const double>(x), ledger);
    CHECK(bitwise_equal(y, ref));
    CHECK(ledger.last() == 1536);
    CHECK(stencil_halo_scalars(g, 4) == 1536);
    CHECK(ledger.total_bytes() == 1536 * sizeof(double));
}

TEST_CASE("partitioned stencil is bitwise invariant over workers, boundaries and coefficients") {
    const Grid3D g(6, 5, 9);
    std::vector<StencilOperator<double>> ops(3, StencilOperator<double>{g});
    ops[1].bc = BoundaryCondition::periodic();
    ops[2].coeff = Coefficient{[](double x, double y, double z) { return 1.0 + x * y + z; }, 3, "1+xy+z"};
    for (const auto& op : ops) {
        const bool periodic = op.bc.kind() == BoundaryCondition::Kind::none;
        const auto x = random_vector(g.size(), 3);
        const auto ref = fused_apply(op, 0.5, -2.0, Field<double>(g, x)).values();
        for (int m = 1; m <= 4; ++m) {
            auto ledger = std::make_shared<TransferLedger>();
            PartitionedStencil<double> P(op, m, ledger);
            std::vector<double> y(g.size());
            P.fused_apply(0.5, -2.0, x, y);
            P.fused_apply(0.5, -2.0, x, y);
            CHECK(bitwise_equal(y, ref));
            CHECK(ledger->applies() == 2);
            const std::uint64_t expected = 2u * (m - 1) * 30u + (periodic && m >= 2 ? 60u : 0u);
            CHECK(ledger->last() == expected);
            CHECK(P.scalars_per_apply() == expected);
        }
    }
}

TEST_CASE("partitioned stencil on complex fields") {
    const Grid3D g(4, 4, 6);
    const StencilOperator<std::complex<double>> op{g};
    std::vector<std::complex<double>> x(g.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = {std::sin(1.0 * i), std::cos(3.0 * i)};
    const auto ref = expint::apply(op, Field<std::complex<double>>(g, x)).values();
    TransferLedger ledger;
    CHECK(bitwise_equal(partitioned_apply(op, 3, std::span<const std::complex<double>>(x), ledger), ref));
    CHECK(ledger.last() == 2 * 2 * 16);
}

TEST_CASE("partitioned CSR records dense coupling") {
    CHECK(csr_dense_coupling_scalars(std::uint64_t{1} << 21, 4) == 6291456);
    CHECK(csr_dense_coupling_scalars(100, 1) == 0);

    const auto A = assemble_stencil<double>(StencilOperator<double>{Grid3D(7, 6, 5)}).first;
    const auto x = random_vector(A.nrows(), 4);
    std::vector<double> ref(A.nrows());
    fused_spmv(A, 1.5, 0.25, std::span<const double>(x), std::span<double>(ref));
    for (int m = 1; m <= 4; ++m) {
        TransferLedger ledger;
        const auto y = partitioned_apply(A, m, std::span<const double>(x), ledger, 1.5, 0.25);
        CHECK(bitwise_equal(y, ref));
        CHECK(ledger.last() == static_cast<std::uint64_t>(m - 1) * A.nrows());
    }
}

TEST_CASE("ledger CSV dump") {
    TransferLedger ledger;
    ledger.record(10, 8);
    ledger.record(0, 8);
    ledger.record(3, 16);
    std::ostringstream os;
    ledger.write_csv(os);
    CHECK(os.str() == "apply,scalars_moved,cumulative_bytes\n0,10,80\n1,0,80\n2,3,128\n");
    CHECK(ledger.total_scalars() == 13);
    ledger.clear();
    CHECK(ledger.applies() == 0);
    CHECK(ledger.total_bytes() == 0);
}

TEST_CASE("worker pool runs every worker and propagates the lowest failure") {
    WorkerPool pool(4);
    std::vector<int> hits(4, 0);
    for (int round = 0; round < 50; ++round) pool.run([&](int w) { hits[static_cast<std::size_t>(w)]++; });
    CHECK(hits == std::vector<int>{50, 50, 50, 50});

    try {
        pool.run([](int w) {
            if (w >= 1) throw DomainError("worker " + std::to_string(w), static_cast<std::size_t>(w));
        });
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(e.index() == 1);
    }
    pool.run([&](int w) { hits[static_cast<std::size_t>(w)]++; });
    CHECK(hits[3] == 51);
    CHECK_THROWS_AS(WorkerPool(0), ConfigError);
}

TEST_CASE("Newton interpolation on the partition matches serial and counts halo traffic") {
    const Grid3D g = Grid3D::cube(9);
    const StencilOperator<double> op{g};
    const StencilLinearOperator<double> serial(op);
    const auto ip = LejaInterpolant::build(serial.spectral_interval(), Target::exp, 1e-3, 150, 1e-8);
    const auto v = random_vector(g.size(), 5);
    const auto ref = newton_apply(serial, ip, std::span<const double>(v), 1e-8);
    for (int m = 1; m <= 4; ++m) {
        auto ledger = std::make_shared<TransferLedger>();
        const PartitionedStencil<double> P(op, m, ledger);
        const auto r = partitioned_newton_apply(P, ip, std::span<const double>(v), 1e-8);
        CHECK(bitwise_equal(r.y, ref.y));
        CHECK(r.matvecs == ref.matvecs);
        CHECK(ledger->total_scalars() == r.matvecs * stencil_halo_scalars(g, m));
    }
}

TEST_CASE("combustion step is bitwise invariant over worker counts") {
    const Grid3D g = Grid3D::cube(13);
    const StencilOperator<double> op{g};
    std::vector<double> u0(g.size());
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = 1.0 + 0.5 * std::sin(0.1 * i);
    std::vector<double> ref;
    for (int m = 1; m <= 4; ++m) {
        SemilinearProblem<double> p;
        p.A = std::make_shared<PartitionedStencil<double>>(op, m);
        p.g = make_nonlinearity<double>("combustion");
        const auto r = exponential_euler_step(p, std::span<const double>(u0), 0.0, 1e-4, 1e-8);
        if (m == 1) ref = r.u;
        CHECK(bitwise_equal(r.u, ref));
    }
}

TEST_CASE("slab-local domain errors report the global index") {
    const Grid3D g(3, 3, 8);
    SemilinearProblem<double> p;
    p.A = std::make_shared<PartitionedStencil<double>>(StencilOperator<double>{g}, 4);
    p.g = make_nonlinearity<double>("combustion");
    std::vector<double> u(g.size(), 1.0);
    u[40] = -1.0; // slab 2
    u[60] = 0.0;  // slab 3
    try {
        exponential_euler_step(p, std::span<const double>(u), 0.0, 1e-4, 1e-8);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(e.index() == 40);
    }
}

TEST_CASE("partitioned operators reject invalid setups") {
    StencilOperator<double> op{Grid3D(4, 4, 4)};
    op.bc = BoundaryCondition::function([](double, double, double) { return 1.0; }, "1");
    CHECK_THROWS_AS(PartitionedStencil<double>(op, 2), BoundaryKindError);
    CHECK_THROWS_AS(PartitionedStencil<double>(StencilOperator<double>{Grid3D(4, 4, 4)}, 8), ConfigError);
    const PartitionedStencil<double> P(StencilOperator<double>{Grid3D(4, 4, 4)}, 2);
    std::vector<double> x(10), y(64);
    CHECK_THROWS_AS(P.fused_apply(1.0, 0.0, x, y), DimensionError);
    auto rect = std::make_shared<const CsrMatrix<double>>(CsrMatrix<double>::from_triplets(3, 4, {}));
    CHECK_THROWS_AS(PartitionedCsr<double>(rect, 2), DimensionError);
}

TEST_CASE("scaling smoke run" * doctest::description("timings are informational only")) {
    const Grid3D g = Grid3D::cube(48);
    const StencilOperator<double> op{g};
    const auto x = random_vector(g.size(), 6);
    std::vector<double> y(g.size());
    for (int m : {1, 2, 4}) {
        const PartitionedStencil<double> P(op, m);
        const auto t0 = std::chrono::steady_clock::now();
        for (int r = 0; r < 5; ++r) P.fused_apply(1.0, 0.0, x, y);
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 5;
        MESSAGE("m=" << m << " apply " << s * 1e3 << " ms");
    }
}
