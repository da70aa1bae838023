#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "expint/matfunc.hpp"
#include "oracles.hpp"

using namespace expint;
using cd = std::complex<double>;

namespace {

std::vector<double> as_std(const oracle::Vec& v) {
    return {v.data(), v.data() + v.size()};
}

double rel2(const std::vector<double>& a, const oracle::Vec& b) {
    double num = 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) num += (a[i] - b(i)) * (a[i] - b(i));
    return std::sqrt(num) / b.norm();
}

double rel2(const std::vector<cd>& a, const oracle::CVec& b) {
    double num = 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) num += std::norm(a[i] - b(i));
    return std::sqrt(num) / b.norm();
}

double phi1_real(double z) {
    return z == 0.0 ? 1.0 : std::expm1(z) / z;
}

// The fourth Leja point is a tie between mirror images; once a tie is broken
// the rest of the sequence follows the chosen side.
bool same_up_to_mirror(const std::vector<double>& got, const std::vector<double>& ref, double center, double tol) {
    if (got.size() != ref.size()) return false;
    bool direct = true, mirrored = true;
    for (std::size_t k = 0; k < got.size(); ++k) {
        const bool d = std::abs(got[k] - ref[k]) <= tol;
        const bool m = std::abs((got[k] - center) + (ref[k] - center)) <= tol;
        if (k < 3) {
            if (!d) return false;
        } else {
            direct = direct && d;
            mirrored = mirrored && m;
        }
    }
    return direct || mirrored;
}

} // namespace

TEST_CASE("gershgorin examples") {
    const auto iv = gershgorin_interval(StencilOperator<double>{Grid3D(3, 1, 1)});
    CHECK(iv.a == 0.0);
    CHECK(iv.b == 64.0);
    CHECK(iv.axis == SpectralAxis::real);

    const auto Z = CsrMatrix<double>::from_triplets(3, 3, {});
    const auto z = gershgorin_interval(Z);
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);

    const auto D = CsrMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 5.0}});
    const auto d = gershgorin_interval(D);
    CHECK(d.a == 1.0);
    CHECK(d.b == 5.0);
}

TEST_CASE("gershgorin interval contains the spectrum of small stencils") {
    for (const Grid3D& g : {Grid3D::cube(4), Grid3D::cube(6), Grid3D(5, 3, 2), Grid3D(6, 1, 1)}) {
        for (auto bc : {BoundaryCondition::homogeneous(), BoundaryCondition::periodic()}) {
            for (bool coeff : {false, true}) {
                StencilOperator<double> op{g};
                op.bc = bc;
                if (coeff) op.coeff = inverse_radial_diffusion();
                const auto iv = gershgorin_interval(op);
                Eigen::EigenSolver<oracle::Mat> es(oracle::dense_stencil(op));
                for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                    const double l = es.eigenvalues()(i).real();
                    CHECK(l >= iv.a - 1e-9 * iv.b);
                    CHECK(l <= iv.b * (1 + 1e-12));
                }
            }
        }
    }
}

TEST_CASE("skew-Hermitian matrices get an imaginary-axis interval") {
    std::mt19937_64 rng(4);
    const auto H = oracle::sparse_hermitian(30, 40, 10, rng);
    std::vector<Triplet<cd>> tr;
    const auto rp = H.row_ptr();
    for (std::size_t r = 0; r < H.nrows(); ++r)
        for (auto k = rp[r]; k < rp[r + 1]; ++k)
            tr.push_back({static_cast<int>(r), H.col_idx()[k], cd(0, 1) * H.values()[k]});
    const auto A = CsrMatrix<cd>::from_triplets(30, 30, tr);
    CHECK(is_hermitian(H));
    CHECK(is_skew_hermitian(A));
    CHECK(gershgorin_interval(H).axis == SpectralAxis::real);
    const auto iv = gershgorin_interval(A);
    CHECK(iv.axis == SpectralAxis::imaginary);
    Eigen::SelfAdjointEigenSolver<oracle::CMat> es(oracle::to_dense(H));
    CHECK(es.eigenvalues().minCoeff() >= iv.a);
    CHECK(es.eigenvalues().maxCoeff() <= iv.b);
}

TEST_CASE("Leja points on [-2, 2]") {
    const SpectralInterval iv{-2.0, 2.0};
    const auto three = leja_points(iv, 3);
    CHECK(three == std::vector<double>{2.0, -2.0, 0.0});

    const auto five = leja_points(iv, 5);
    CHECK(same_up_to_mirror(five, oracle::leja_bruteforce(-2.0, 2.0, 5), 0.0, 4e-5));
    // the fourth point maximizes x (4 - x^2): |x| = 2/sqrt(3)
    CHECK(std::abs(five[3]) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-4));
    CHECK(std::abs(std::abs(five[3]) - std::sqrt(2.0)) > 0.2);

    CHECK(leja_points(SpectralInterval{0.0, 0.0}, 1) == std::vector<double>{0.0});
    CHECK(leja_points(iv, 40) == leja_points(iv, 40));
    CHECK_THROWS_AS(canonical_leja_points(leja_candidates + 1), SizeLimitError);
}

TEST_CASE("Leja points on a general interval agree with the brute-force oracle") {
    const auto got = leja_points(SpectralInterval{1.0, 9.0}, 12);
    CHECK(same_up_to_mirror(got, oracle::leja_bruteforce(1.0, 9.0, 12), 5.0, 1e-9));
}

TEST_CASE("divided difference examples") {
    const std::vector<double> one{0.0};
    CHECK(divided_differences(one, Target::exp, 1.0)[0] == cd(1.0));
    const std::vector<double> two{0.0, 1.0};
    const auto dd = divided_differences(two, Target::exp, 1.0);
    CHECK(dd[0].real() == 1.0);
    CHECK(dd[1].real() == doctest::Approx(std::numbers::e - 1).epsilon(1e-15));

    const std::vector<double> nodes{2.0, -2.0, 0.0};
    const auto p = divided_differences(nodes, Target::phi1, 0.1);
    const auto ref = oracle::divided_differences_mp(nodes, oracle::Fn::phi1, 0.1, 0.0);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(p[k].real() - ref[k]) <= 1e-14 * std::abs(ref[k]));
}

TEST_CASE("divided differences at up to 30 Leja nodes match 100-digit recursion") {
    for (std::size_t count : {5, 15, 30}) {
        const auto nodes = canonical_leja_points(count);
        for (double s : {-0.05, -0.5, -2.0, -8.0}) {
            for (double t : {0.0, -3.0}) {
                for (auto [tgt, fn] : {std::pair{Target::exp, oracle::Fn::exp}, std::pair{Target::phi1, oracle::Fn::phi1}}) {
                    const auto got = divided_differences(nodes, tgt, s, t);
                    const auto ref = oracle::divided_differences_mp(nodes, fn, s, t);
                    double worst = 0.0;
                    for (std::size_t k = 0; k < count; ++k) {
                        worst = std::max(worst, std::abs(got[k].real() - ref[k]) / std::abs(ref[k]));
                        CHECK(got[k].imag() == 0.0);
                    }
                    CAPTURE(count);
                    CAPTURE(s);
                    CAPTURE(t);
                    CHECK(worst <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("divided differences refuse absurd scalings") {
    const auto nodes = canonical_leja_points(10);
    CHECK_THROWS_AS(divided_differences(nodes, Target::exp, -1e8, 0.0), ConvergenceError);
}

TEST_CASE("phi1 scalar") {
    CHECK(phi1_scalar(0.0) == 1.0);
    CHECK(phi1_scalar(1.0) == doctest::Approx(1.7182818284590452).epsilon(1e-16));
    CHECK(std::abs(phi1_scalar(-1e-3) - 0.99950016662500833194) <= 1e-15);
    CHECK(phi1_scalar(cd(0.0, 0.0)) == cd(1.0, 0.0));
    for (double z : {1e-2, -1e-2}) {
        const double below = phi1_scalar(std::nextafter(z, 0.0));
        const double above = phi1_scalar(z);
        CHECK(std::abs(above - below) <= 1e-15);
        CHECK(std::abs(above - oracle::phi1_mp(z)) <= 1e-16);
    }
}

TEST_CASE("interpolant layout") {
    const SpectralInterval iv{0.0, 40.0};
    const auto ip = LejaInterpolant::build(iv, Target::exp, 0.01, 20, 1e-8);
    CHECK(ip.nodes.size() == 21);
    CHECK(ip.dd.size() == 21);
    CHECK(ip.nodes[0] == 40.0);
    CHECK(ip.nodes[1] == 0.0);
    CHECK(ip.dd[0] == std::exp(cd(-0.01 * 40.0)));
    const auto pp = LejaInterpolant::build(iv, Target::phi1, 0.01, 20, 1e-8);
    CHECK(pp.dd[0] == phi1_scalar(cd(-0.4)));
}

TEST_CASE("zero operator reproduces v") {
    const CsrLinearOperator<double> Z(CsrMatrix<double>::from_triplets(4, 4, {}));
    const std::vector<double> v{1, -2, 3, 0.5};
    for (Target t : {Target::exp, Target::phi1}) {
        const auto ip = LejaInterpolant::build(Z.spectral_interval(), t, 0.7, 150, 1e-10);
        const auto r = newton_apply(Z, ip, std::span<const double>(v));
        CHECK(r.y == v);
        CHECK(r.matvecs <= 2);
    }
}

TEST_CASE("random symmetric matrices match the dense eigendecomposition") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 40.0);
    oracle::Vec eigs(50);
    for (int i = 0; i < 50; ++i) eigs(i) = u(rng);
    eigs(0) = 0.0;
    eigs(1) = 40.0;
    const oracle::Mat M = oracle::symmetric_with_spectrum(eigs, rng);
    const CsrLinearOperator<double> A(oracle::to_csr(M));
    const oracle::Vec v = oracle::Vec::Random(50);
    const std::vector<double> vs = as_std(v);
    const double h = 0.01;
    const auto iv = A.spectral_interval();

    const auto ie = LejaInterpolant::build(iv, Target::exp, h, 150, 1e-10);
    const auto re = newton_apply(A, ie, std::span<const double>(vs));
    const oracle::Vec ref_e = oracle::symmetric_function(M, [h](double l) { return std::exp(-h * l); }) * v;
    CHECK(rel2(re.y, ref_e) <= 1e-8);

    const auto ip = LejaInterpolant::build(iv, Target::phi1, h, 150, 1e-10);
    const auto rp = newton_apply(A, ip, std::span<const double>(vs));
    const oracle::Vec ref_p = oracle::symmetric_function(M, [h](double l) { return phi1_real(-h * l); }) * v;
    CHECK(rel2(rp.y, ref_p) <= 1e-8);
    CHECK(re.matvecs > 0);
}

TEST_CASE("17^3 Laplacian converges within degree 150") {
    const StencilLinearOperator<double> A(StencilOperator<double>{Grid3D::cube(17)});
    const auto iv = A.spectral_interval();
    const double h = 20.0 * 4.0 / (iv.b - iv.a);
    std::vector<double> v(A.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(0.1 * static_cast<double>(i));
    for (Target t : {Target::exp, Target::phi1}) {
        const auto ip = LejaInterpolant::build(iv, t, h, 150, 1e-8);
        const auto r = newton_apply(A, ip, std::span<const double>(v));
        CHECK(r.degree <= 150);
    }
}

TEST_CASE("widening the interval changes the result by at most 10 tol ||v||") {
    const StencilLinearOperator<double> A(StencilOperator<double>{Grid3D::cube(7)});
    const auto iv = A.spectral_interval();
    std::vector<double> v(A.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i));
    const double tol = 1e-8, h = 2e-3;
    const double vn = detail::norm2(std::span<const double>(v));
    for (Target t : {Target::exp, Target::phi1}) {
        const auto a = newton_apply(A, LejaInterpolant::build(iv, t, h, 150, tol), std::span<const double>(v));
        const auto b = newton_apply(A, LejaInterpolant::build(iv.widened(1.0), t, h, 150, tol), std::span<const double>(v));
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) d += (a.y[i] - b.y[i]) * (a.y[i] - b.y[i]);
        CHECK(std::sqrt(d) <= 10 * tol * vn);
    }
}

TEST_CASE("interpolation is exact when the eigenvalues are nodes") {
    const SpectralInterval iv{0.0, 8.0};
    const auto ip = LejaInterpolant::build(iv, Target::exp, 0.3, 10, 1e-13);
    std::vector<Triplet<double>> tr;
    const int d = 4;
    for (int i = 0; i < 8; ++i) tr.push_back({i, i, ip.nodes[static_cast<std::size_t>(i % d)]});
    const CsrLinearOperator<double> A(CsrMatrix<double>::from_triplets(8, 8, tr));
    const std::vector<double> v(8, 1.0);
    const auto r = newton_apply(A, ip, std::span<const double>(v));
    for (int i = 0; i < 8; ++i) {
        CHECK(r.y[static_cast<std::size_t>(i)] ==
              doctest::Approx(std::exp(-0.3 * ip.nodes[static_cast<std::size_t>(i % d)])).epsilon(1e-13));
    }
}

TEST_CASE("non-convergence carries a residual estimate") {
    const StencilLinearOperator<double> A(StencilOperator<double>{Grid3D::cube(9)});
    const auto ip = LejaInterpolant::build(A.spectral_interval(), Target::exp, 0.5, 10, 1e-12);
    std::vector<double> v(A.size(), 1.0);
    try {
        newton_apply(A, ip, std::span<const double>(v));
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual_estimate() > 1e-12);
    }
}

TEST_CASE("step halving rescues a large step") {
    std::mt19937_64 rng(8);
    oracle::Vec eigs = oracle::Vec::LinSpaced(30, 0.0, 400.0);
    const oracle::Mat M = oracle::symmetric_with_spectrum(eigs, rng);
    const CsrLinearOperator<double> A(oracle::to_csr(M));
    const oracle::Vec v = oracle::Vec::Random(30);
    const double h = 0.5;
    MatFuncOptions opt;
    opt.tol = 1e-10;
    opt.max_degree = 40;
    const auto e = expmv(A, A.spectral_interval(), h, std::span<const double>(as_std(v)), opt);
    const auto p = phi1mv(A, A.spectral_interval(), h, std::span<const double>(as_std(v)), opt);
    CHECK(e.halvings > 0);
    CHECK(p.halvings > 0);
    const oracle::Vec ref_e = oracle::symmetric_function(M, [h](double l) { return std::exp(-h * l); }) * v;
    const oracle::Vec ref_p = oracle::symmetric_function(M, [h](double l) { return phi1_real(-h * l); }) * v;
    CHECK(rel2(e.y, ref_e) <= 1e-8);
    CHECK(rel2(p.y, ref_p) <= 1e-8);
}

TEST_CASE("imaginary-axis propagation of a Hermitian matrix") {
    std::mt19937_64 rng(12);
    const auto H = oracle::sparse_hermitian(64, 200, 30, rng);
    std::vector<Triplet<cd>> tr;
    for (std::size_t r = 0; r < H.nrows(); ++r)
        for (auto k = H.row_ptr()[r]; k < H.row_ptr()[r + 1]; ++k)
            tr.push_back({static_cast<int>(r), H.col_idx()[k], cd(0, 1) * H.values()[k]});
    const CsrLinearOperator<cd> A(CsrMatrix<cd>::from_triplets(64, 64, tr));
    oracle::CVec psi = oracle::CVec::Random(64);
    psi.normalize();
    const std::vector<cd> ps(psi.data(), psi.data() + 64);
    const double t = 0.1;
    MatFuncOptions opt;
    opt.tol = 1e-10;
    const auto r = expmv(A, A.spectral_interval(), t, std::span<const cd>(ps), opt);
    const oracle::CVec ref = oracle::hermitian_function(oracle::to_dense(H), [t](double l) {
                                 return std::exp(cd(0.0, -l * t));
                             }) * psi;
    CHECK(rel2(r.y, ref) <= 1e-8);

    const CsrLinearOperator<double> real_op(CsrMatrix<double>::identity(3));
    const auto ip = LejaInterpolant::build({-1.0, 1.0, SpectralAxis::imaginary}, Target::exp, 0.1, 10, 1e-8);
    const std::vector<double> v(3, 1.0);
    CHECK_THROWS_AS(newton_apply(real_op, ip, std::span<const double>(v)), DimensionError);
}

TEST_CASE("dimension mismatch") {
    const CsrLinearOperator<double> A(CsrMatrix<double>::identity(3));
    const auto ip = LejaInterpolant::build({1.0, 1.0}, Target::exp, 0.1, 10, 1e-8);
    const std::vector<double> v(4, 1.0);
    CHECK_THROWS_AS(newton_apply(A, ip, std::span<const double>(v)), DimensionError);
}
