#include <doctest.h>

#include <random>
#include <sstream>

#include "expint/matrix_market.hpp"
#include "expint/sparse.hpp"
#include "oracles.hpp"

using namespace expint;

namespace {

CsrMatrix<double> upper2() {
    return CsrMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 3.0}});
}

oracle::Mat random_dense(int rows, int cols, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0), v(-1.0, 1.0);
    oracle::Mat A = oracle::Mat::Zero(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (u(rng) < density) A(i, j) = v(rng);
    return A;
}

} // namespace

TEST_CASE("spmv examples") {
    const auto I = CsrMatrix<double>::identity(3);
    CHECK(spmv(I, std::vector<double>{1, 2, 3}) == std::vector<double>{1, 2, 3});
    CHECK(spmv(upper2(), std::vector<double>{1, 1}) == std::vector<double>{3, 3});
    CHECK_THROWS_AS(spmv(upper2(), std::vector<double>{1, 1, 1}), DimensionError);
}

TEST_CASE("fused spmv examples") {
    const std::vector<double> x{1, 2};
    CHECK(fused_spmv(upper2(), 0.0, 2.0, std::span<const double>(x)) == std::vector<double>{2, 4});
    const auto I = CsrMatrix<double>::identity(2);
    CHECK(fused_spmv(I, 1.0, 1.0, std::span<const double>(x)) == std::vector<double>{2, 4});
    const std::vector<double> ones{1, 1};
    CHECK(fused_spmv(upper2(), 2.0, 1.0, std::span<const double>(ones)) == std::vector<double>{7, 7});
    const auto rect = CsrMatrix<double>::from_triplets(2, 3, {{0, 2, 1.0}});
    CHECK_THROWS_AS(fused_spmv(rect, 1.0, 0.0, std::span<const double>(x)), DimensionError);
}

TEST_CASE("random matrices match the dense product") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 20 + 8 * trial;
        const oracle::Mat D = random_dense(n, n, 0.1, rng);
        auto A = oracle::to_csr(D);
        oracle::Vec x = oracle::Vec::Random(n);
        const std::vector<double> xs(x.data(), x.data() + n);
        const oracle::Vec ref = D * x;
        const oracle::Vec fref = 0.7 * ref - 1.3 * x;
        for (int threads : {1, 3}) {
            A.threads = threads;
            const auto y = spmv(A, std::span<const double>(xs));
            const auto f = fused_spmv(A, 0.7, -1.3, std::span<const double>(xs));
            CHECK(oracle::rel_max_error(y, std::vector<double>(ref.data(), ref.data() + n)) <= 1e-13);
            CHECK(oracle::rel_max_error(f, std::vector<double>(fref.data(), fref.data() + n)) <= 1e-13);
            CHECK(fused_spmv(A, 1.0, 0.0, std::span<const double>(xs)) == y);
        }
    }
}

TEST_CASE("single precision spmv is within 1e-5") {
    std::mt19937_64 rng(5);
    const oracle::Mat D = random_dense(100, 100, 0.1, rng);
    std::vector<Triplet<float>> tr;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j)
            if (D(i, j) != 0.0) tr.push_back({i, j, static_cast<float>(D(i, j))});
    const auto A = CsrMatrix<float>::from_triplets(100, 100, tr);
    std::vector<float> x(100);
    oracle::Vec xd(100);
    for (int i = 0; i < 100; ++i) xd(i) = x[i] = static_cast<float>(std::sin(i));
    oracle::Mat Df = D.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
    const oracle::Vec ref = Df * xd;
    std::vector<float> expect(100);
    for (int i = 0; i < 100; ++i) expect[i] = static_cast<float>(ref(i));
    CHECK(oracle::rel_max_error(spmv(A, std::span<const float>(x)), expect) <= 1e-5);
}

TEST_CASE("construction validates structure") {
    CHECK_THROWS_AS(CsrMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), DimensionError);
    CHECK_THROWS_AS(CsrMatrix<double>::from_triplets(2, 2, {{2, 0, 1.0}}), IndexError);
    CHECK_THROWS_AS(CsrMatrix<double>(2, 2, {0, 2, 1}, {0, 1}, {1.0, 2.0}), DimensionError);
    CHECK_THROWS_AS(CsrMatrix<double>(1, 2, {0, 2}, {1, 0}, {1.0, 2.0}), DimensionError);
    CHECK_THROWS_AS(CsrMatrix<double>(1, 2, {0, 1}, {5}, {1.0}), IndexError);
    CHECK(upper2().coeff(0, 1) == 2.0);
    CHECK(upper2().coeff(1, 0) == 0.0);
}

TEST_CASE("assembled 1D stencil rows") {
    const StencilOperator<double> op{Grid3D(3, 1, 1)};
    const auto [A, b] = assemble_stencil(op);
    const oracle::Mat D = oracle::to_dense(A);
    oracle::Mat expect(3, 3);
    expect << 32, -16, 0, -16, 32, -16, 0, -16, 32;
    CHECK(D == expect);
    for (double v : b) CHECK(v == 0.0);

    StencilOperator<double> per = op;
    per.bc = BoundaryCondition::periodic();
    oracle::Mat circ(3, 3);
    circ << 32, -16, -16, -16, 32, -16, -16, -16, 32;
    CHECK(oracle::to_dense(assemble_stencil(per).first) == circ);
}

TEST_CASE("assembled 5^3 operator is symmetric with nonnegative row sums") {
    const auto [A, b] = assemble_stencil(StencilOperator<double>{Grid3D::cube(5)});
    const oracle::Mat D = oracle::to_dense(A);
    CHECK(D == D.transpose());
    CHECK(D.rowwise().sum().minCoeff() >= 0.0);
    CHECK(A.nnz() == stencil_nnz_dirichlet(5));
}

TEST_CASE("assembled form reproduces the stencil for every boundary kind") {
    const Grid3D g(6, 5, 4);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1, 1);
    Field<double> u(g);
    for (auto& v : u.values()) v = d(rng);
    for (auto bc : {BoundaryCondition::periodic(), BoundaryCondition::homogeneous(),
                    BoundaryCondition::function([](double x, double y, double z) { return z * (1 - z) * x * y; }, "q")}) {
        StencilOperator<double> op{g};
        op.bc = bc;
        op.coeff = inverse_radial_diffusion();
        const auto [A, b] = assemble_stencil(op);
        auto y = spmv(A, u.values());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
        CHECK(oracle::rel_max_error(y, apply(op, u).values()) <= 1e-13);
    }
}

TEST_CASE("assembly guard") {
    CHECK_THROWS_AS(assemble_stencil(StencilOperator<double>{Grid3D::cube(162)}), SizeLimitError);
}

TEST_CASE("memory accounting for the 512^3 stencil") {
    const std::uint64_t n = 512ULL * 512 * 512;
    const std::uint64_t nnz = stencil_nnz_dirichlet(512);
    CHECK(nnz == 7 * n - 6 * 512 * 512);
    const double b32 = static_cast<double>(csr_memory_bytes(nnz, n, 8, 4));
    const double b64 = static_cast<double>(csr_memory_bytes(nnz, n, 8, 8));
    CHECK(b32 == 12 * static_cast<double>(nnz) + 4 * static_cast<double>(n + 1));
    // 10 GB read as binary gigabytes: the 32-bit layout is within 15%
    const double gib = 1024.0 * 1024.0 * 1024.0;
    CHECK(std::abs(b32 / gib - 10.0) / 10.0 <= 0.15);
    CHECK(b64 > b32);
}

TEST_CASE("index width guard") {
    CHECK_THROWS_AS(CsrMatrix<double>::check_index_width(std::size_t{1} << 31, 1, 0), SizeLimitError);
    CHECK_NOTHROW(CsrMatrix<double, std::int64_t>::check_index_width(std::size_t{1} << 31, 1, 0));
}

TEST_CASE("matrix market: identity, hermitian expansion and errors") {
    std::istringstream id("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1\n2 2 1\n");
    const auto I = read_matrix_market<double>(id);
    CHECK(I.nnz() == 2);
    CHECK(I.coeff(1, 1) == 1.0);

    std::istringstream herm("%%MatrixMarket matrix coordinate complex hermitian\n3 3 4\n1 1 2 0\n2 1 1 -1\n3 2 0 0.5\n3 3 -1 0\n");
    const auto H = read_matrix_market<std::complex<double>>(herm);
    const oracle::CMat D = oracle::to_dense(H);
    CHECK(D == D.adjoint());
    CHECK(H.nnz() == 6);

    std::istringstream sym("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 -1\n");
    CHECK(oracle::to_dense(read_matrix_market<double>(sym)) == oracle::to_dense(
        CsrMatrix<double>::from_triplets(2, 2, {{0, 0, 4.0}, {0, 1, -1.0}, {1, 0, -1.0}})));

    std::istringstream pattern("%%MatrixMarket matrix coordinate pattern general\n2 3 2\n1 3\n2 1\n");
    const auto P = read_matrix_market<double>(pattern);
    CHECK(P.coeff(0, 2) == 1.0);
    CHECK(P.ncols() == 3);

    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream is(text);
        try {
            read_matrix_market<double>(is);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("%%MatrixMarket matrix array real general\n") == 1);
    CHECK(line_of("%MatrixMarket matrix coordinate real general\n") == 1);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n") == 4);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n1 1 5\n") == 5);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n") == 3);
    CHECK(line_of("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 1\n") == 1);
}

TEST_CASE("matrix market round trip is value identical") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1, 1), u(0, 1);
    std::vector<Triplet<std::complex<double>>> tr;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            if (u(rng) < 0.3) tr.push_back({i, j, {d(rng) * 1e-7, d(rng) * 1e5}});
    const auto A = CsrMatrix<std::complex<double>>::from_triplets(20, 20, tr);
    std::stringstream s1;
    write_matrix_market(A, s1);
    const auto B = read_matrix_market<std::complex<double>>(s1);
    std::stringstream s2;
    write_matrix_market(B, s2);
    const auto C = read_matrix_market<std::complex<double>>(s2);
    CHECK(std::equal(A.values().begin(), A.values().end(), B.values().begin(), B.values().end()));
    CHECK(std::equal(B.values().begin(), B.values().end(), C.values().begin(), C.values().end()));
    CHECK(std::equal(A.col_idx().begin(), A.col_idx().end(), C.col_idx().begin(), C.col_idx().end()));
    CHECK(s1.str() == s2.str());
}
