#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "formdecomp/cmatrix.hpp"
#include "formdecomp/errors.hpp"
#include "formdecomp/linalg.hpp"
#include "formdecomp/rng.hpp"

using namespace formdecomp;

namespace {

// Eigenvalues of a real symmetric 2x2 [[a, b], [b, c]] from the quadratic
// formula; independent oracle for the svd/eig golden values.
std::pair<double, double> sym2x2_eigs(double a, double b, double c) {
    double mean = 0.5 * (a + c);
    double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return {mean + disc, mean - disc};
}

CMatrix reconstruct(const SVDResult& d, std::size_t rows, std::size_t cols) {
    CMatrix sigma = CMatrix::zero(rows, cols);
    for (std::size_t k = 0; k < d.s.size(); ++k) sigma(k, k) = d.s[k];
    return d.u * sigma * d.v.adjoint();
}

bool is_identity(const CMatrix& m, double tol) {
    return max_abs_diff(m, CMatrix::identity(m.rows())) <= tol;
}

}  // namespace

TEST_CASE("svd of diagonal and zero matrices") {
    CMatrix d{{2.0, 0.0}, {0.0, 1.0}};
    SVDResult r = svd(d);
    CHECK(r.s[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.s[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(is_identity(r.u, 1e-14));
    CHECK(is_identity(r.v, 1e-14));

    SVDResult z = svd(CMatrix::zero(2, 2));
    CHECK(z.s[0] == 0.0);
    CHECK(z.s[1] == 0.0);
    CHECK(is_identity(z.u.adjoint() * z.u, 1e-14));
}

TEST_CASE("svd of the positive matrix [[2,1],[1,1]] matches the 2x2 oracle") {
    auto [lo_hi, lo_lo] = sym2x2_eigs(2.0, 1.0, 1.0);
    CHECK(lo_hi == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
    CMatrix c{{2.0, 1.0}, {1.0, 1.0}};
    SVDResult r = svd(c);
    CHECK(r.s[0] == doctest::Approx(lo_hi).epsilon(1e-13));
    CHECK(r.s[1] == doctest::Approx(lo_lo).epsilon(1e-13));
    CHECK(max_abs_diff(reconstruct(r, 2, 2), c) <= 1e-13);
}

TEST_CASE("svd invariants on random matrices, square and rectangular") {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t rows = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        std::size_t cols = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        CMatrix m = rng.gaussian_matrix(rows, cols);
        SVDResult r = svd(m);
        double scale = std::max(1.0, m.max_abs());
        CHECK(max_abs_diff(reconstruct(r, rows, cols), m) <= 1e-12 * scale);
        CHECK(is_identity(r.u.adjoint() * r.u, 1e-12));
        CHECK(is_identity(r.v.adjoint() * r.v, 1e-12));
        for (std::size_t k = 0; k + 1 < r.s.size(); ++k) CHECK(r.s[k] >= r.s[k + 1]);
    }
}

TEST_CASE("svd phase convention is deterministic") {
    Rng rng(7);
    CMatrix m = rng.gaussian_matrix(4, 4);
    SVDResult a = svd(m);
    SVDResult b = svd(m);
    CHECK(max_abs_diff(a.u, b.u) == 0.0);
    // first nonzero component of each left singular vector is real positive
    for (std::size_t j = 0; j < a.u.cols(); ++j) {
        for (std::size_t i = 0; i < a.u.rows(); ++i) {
            if (std::abs(a.u(i, j)) > 1e-12) {
                CHECK(a.u(i, j).imag() == doctest::Approx(0.0).epsilon(1e-13));
                CHECK(a.u(i, j).real() > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("svd rejects non-finite input") {
    CMatrix m{{1.0, 0.0}, {0.0, 1.0}};
    m(0, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(svd(m), InvalidInput);
}

TEST_CASE("hermitian_eig golden values") {
    EigResult id = hermitian_eig(CMatrix::identity(2));
    CHECK(id.values[0] == doctest::Approx(1.0));
    CHECK(id.values[1] == doctest::Approx(1.0));

    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    EigResult ea = hermitian_eig(a);
    CHECK(ea.values[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ea.values[1] == doctest::Approx(1.0).epsilon(1e-14));

    auto [hi, lo] = sym2x2_eigs(2.0, 1.0, 1.0);
    CMatrix c{{2.0, 1.0}, {1.0, 1.0}};
    EigResult ec = hermitian_eig(c);
    CHECK(ec.values[0] == doctest::Approx(hi).epsilon(1e-13));
    CHECK(ec.values[1] == doctest::Approx(lo).epsilon(1e-13));
}

TEST_CASE("hermitian_eig reconstructs random Hermitian matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 14);  // up to 16
        CMatrix g = rng.gaussian_matrix(n, n);
        CMatrix h = 0.5 * (g + g.adjoint());
        EigResult e = hermitian_eig(h);
        CMatrix rec = e.vectors * CMatrix::diag(e.values) * e.vectors.adjoint();
        CHECK(max_abs_diff(rec, h) <= 1e-12 * std::max(1.0, h.max_abs()) * n);
        for (std::size_t k = 0; k + 1 < n; ++k) CHECK(e.values[k] >= e.values[k + 1]);
    }
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
    CMatrix m{{1.0, 2.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(hermitian_eig(m), InvalidInput);
}

TEST_CASE("polar decomposition") {
    SUBCASE("unitary input returns itself and the identity") {
        Rng rng(3);
        CMatrix q = random_unitary(rng, 3);
        PolarResult p = polar(q);
        CHECK(max_abs_diff(p.isometry, q) <= 1e-12);
        CHECK(is_identity(p.absolute, 1e-12));
    }
    SUBCASE("sign split of diag(-2, 1)") {
        CMatrix m{{-2.0, 0.0}, {0.0, 1.0}};
        PolarResult p = polar(m);
        CHECK(max_abs_diff(p.isometry, CMatrix{{-1.0, 0.0}, {0.0, 1.0}}) <= 1e-14);
        CHECK(max_abs_diff(p.absolute, CMatrix{{2.0, 0.0}, {0.0, 1.0}}) <= 1e-14);
    }
    SUBCASE("random invertible against the svd-based oracle") {
        Rng rng(5);
        for (int t = 0; t < 10; ++t) {
            CMatrix m = random_invertible(rng, 3, 100.0);
            PolarResult p = polar(m);
            SVDResult d = svd(m);
            CHECK(max_abs_diff(p.isometry, d.u * d.v.adjoint()) <= 1e-11);
            CHECK(is_identity(p.isometry.adjoint() * p.isometry, 1e-11));
            CHECK(max_abs_diff(p.isometry * p.absolute, m) <= 1e-11 * std::max(1.0, m.max_abs()));
        }
    }
}

TEST_CASE("trace norm golden values") {
    CHECK(trace_norm(CMatrix::identity(2)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(trace_norm(CMatrix{{2.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(3.0).epsilon(1e-14));
    // positive matrix: trace norm equals the trace
    CHECK(trace_norm(CMatrix{{2.0, 1.0}, {1.0, 1.0}}) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("operator norm golden values") {
    CHECK(operator_norm(CMatrix::identity(2)) == doctest::Approx(1.0));
    CHECK(operator_norm(CMatrix{{2.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(2.0));
    Rng rng(9);
    CVector g = rng.gaussian_vector(3), h = rng.gaussian_vector(4);
    CHECK(operator_norm(outer(g, h)) == doctest::Approx(vnorm(g) * vnorm(h)).epsilon(1e-12));
}

TEST_CASE("trace norm dominates operator norm; equality at rank one") {
    Rng rng(13);
    for (int t = 0; t < 20; ++t) {
        CMatrix m = rng.gaussian_matrix(3, 3);
        CHECK(trace_norm(m) >= operator_norm(m) - 1e-12);
        CVector g = rng.gaussian_vector(3), h = rng.gaussian_vector(3);
        CMatrix r1 = outer(g, h);
        CHECK(trace_norm(r1) == doctest::Approx(operator_norm(r1)).epsilon(1e-11));
    }
}

TEST_CASE("trace norm of a positive matrix is its trace") {
    Rng rng(15);
    for (int t = 0; t < 15; ++t) {
        std::size_t n = 2 + t % 3;
        CMatrix p = random_psd(rng, n);
        CHECK(trace_norm(p) ==
              doctest::Approx(p.trace().real()).epsilon(1e-12));
    }
}

TEST_CASE("trace norm unitary invariance") {
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        CMatrix m = rng.gaussian_matrix(4, 4);
        CMatrix u = random_unitary(rng, 4);
        CMatrix v = random_unitary(rng, 4);
        double tn = trace_norm(m);
        CHECK(trace_norm(m.adjoint()) == doctest::Approx(tn).epsilon(1e-10));
        CHECK(trace_norm(u * m * v) == doctest::Approx(tn).epsilon(1e-10));
    }
}

TEST_CASE("polar/svd consistency for |m|") {
    Rng rng(19);
    for (int t = 0; t < 10; ++t) {
        CMatrix m = rng.gaussian_matrix(3, 3);
        PolarResult p = polar(m);
        SVDResult d = svd(m);
        CMatrix abs_from_svd = d.v * CMatrix::diag(d.s) * d.v.adjoint();
        CHECK(max_abs_diff(p.absolute, abs_from_svd) <= 1e-10);
    }
}

TEST_CASE("sqrt_psd") {
    CHECK(max_abs_diff(sqrt_psd(CMatrix::identity(3)), CMatrix::identity(3)) <= 1e-14);
    CHECK(max_abs_diff(sqrt_psd(CMatrix{{4.0, 0.0}, {0.0, 9.0}}),
                       CMatrix{{2.0, 0.0}, {0.0, 3.0}}) <= 1e-13);
    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    CMatrix target{{std::sqrt(5.0), 0.0}, {0.0, std::sqrt(2.0)}};
    CHECK(max_abs_diff(sqrt_psd(a.adjoint() * a + CMatrix::identity(2)), target) <= 1e-13);
    CHECK_THROWS_AS(sqrt_psd(CMatrix{{-1.0, 0.0}, {0.0, 1.0}}), InvalidInput);

    Rng rng(23);
    for (int t = 0; t < 10; ++t) {
        CMatrix p = random_psd(rng, 4);
        CMatrix r = sqrt_psd(p);
        CHECK(max_abs_diff(r * r, p) <= 1e-11 * std::max(1.0, p.max_abs()));
    }
}

TEST_CASE("eps_regularize") {
    CHECK(max_abs_diff(eps_regularize(CMatrix::zero(2, 2), 1.0), CMatrix::identity(2)) <= 1e-14);
    CHECK_THROWS_AS(eps_regularize(CMatrix{{2.0, 0.0}, {0.0, 1.0}}, 0.0), InvalidInput);
    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    CMatrix target{{std::sqrt(5.0), 0.0}, {0.0, std::sqrt(2.0)}};
    CHECK(max_abs_diff(eps_regularize(a, 1.0), target) <= 1e-13);

    SUBCASE("dominates the original and is monotone in eps") {
        Rng rng(29);
        for (int t = 0; t < 10; ++t) {
            CMatrix m = rng.gaussian_matrix(3, 3);
            CMatrix r1 = eps_regularize(m, 1e-3);
            CMatrix r2 = eps_regularize(m, 1e-1);
            for (int k = 0; k < 20; ++k) {
                CVector x = random_unit_vector(rng, 3);
                CHECK(vnorm(r1.apply(x)) >= vnorm(m.apply(x)) - 1e-10);
            }
            EigResult diff = hermitian_eig(r2 - r1);
            CHECK(diff.values.back() >= -1e-12);
            EigResult low = hermitian_eig(r1);
            CHECK(low.values.back() >= std::sqrt(1e-3) - 1e-12);
        }
    }
}

TEST_CASE("solve and inverse") {
    Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        CMatrix a = random_invertible(rng, 4, 1e3);
        CMatrix x = rng.gaussian_matrix(4, 2);
        CMatrix b = a * x;
        CHECK(max_abs_diff(solve(a, b), x) <= 1e-9 * std::max(1.0, x.max_abs()));
        CHECK(is_identity(a * inverse(a), 1e-9));
    }
    CHECK_THROWS_AS(solve(CMatrix::zero(2, 2), CMatrix::identity(2)), IllConditioned);
}

TEST_CASE("cond_2") {
    CHECK(cond_2(CMatrix::identity(3)) == doctest::Approx(1.0));
    CHECK(cond_2(CMatrix{{2.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(2.0));
    CHECK(std::isinf(cond_2(CMatrix::zero(2, 2))));
}

TEST_CASE("kron and vec obey vec(XYZ) = (Z^t (x) X) vec(Y)") {
    Rng rng(37);
    CMatrix x = rng.gaussian_matrix(3, 2);
    CMatrix y = rng.gaussian_matrix(2, 4);
    CMatrix z = rng.gaussian_matrix(4, 3);
    CVector lhs = vec_cols(x * y * z);
    CVector rhs = kron(z.transpose(), x).apply(vec_cols(y));
    CHECK(vnorm(vsub(lhs, rhs)) <= 1e-12);
}

TEST_CASE("outer product materialization") {
    // (g (x) h) f = <f|h> g under the linear-first inner product
    Rng rng(41);
    CVector g = rng.gaussian_vector(3), h = rng.gaussian_vector(3), f = rng.gaussian_vector(3);
    CVector lhs = outer(g, h).apply(f);
    CVector rhs = vscale(inner(f, h), g);
    CHECK(vnorm(vsub(lhs, rhs)) <= 1e-12);
}
