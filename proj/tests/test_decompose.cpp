#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "formdecomp/cmatrix.hpp"
#include "formdecomp/decompose.hpp"
#include "formdecomp/errors.hpp"
#include "formdecomp/gauges.hpp"
#include "formdecomp/linalg.hpp"
#include "formdecomp/rng.hpp"

using namespace formdecomp;

namespace {

FormFamily counterexample_family() {
    CMatrix id = CMatrix::identity(2);
    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    CMatrix c{{2.0, 1.0}, {1.0, 1.0}};
    return FormFamily::make({{id, id}, {a, id}, {c, id}});
}

FormFamily identity_family(std::size_t n) {
    CMatrix id = CMatrix::identity(n);
    return FormFamily::make({{id, id}});
}

struct TwoTermInstance {
    FormFamily family;
    CMatrix u;
};

// U = s V1 + B^dagger (s V2) A for random contractions: feasible by
// construction, strictly when s < 1.
TwoTermInstance random_two_term(Rng& rng, std::size_t n, double s) {
    CMatrix id = CMatrix::identity(n);
    CMatrix a = random_invertible(rng, n, 1e3);
    CMatrix b = random_invertible(rng, n, 1e3);
    CMatrix v1 = random_contraction(rng, n, s);
    CMatrix v2 = random_contraction(rng, n, s);
    TwoTermInstance inst{FormFamily::make({{id, id}, {a, b}}), v1 + b.adjoint() * v2 * a};
    return inst;
}

}  // namespace

TEST_CASE("contraction_reduction identities") {
    FormFamily f = counterexample_family();
    CMatrix u{{0.3, 0.1}, {0.0, 0.2}};
    CHECK(max_abs_diff(contraction_reduction(f, u, 0), u) <= 1e-14);

    // U_2 = A against the pair (A, I) is the saturated witness V = I.
    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    CHECK(max_abs_diff(contraction_reduction(f, a, 1), CMatrix::identity(2)) <= 1e-12);
}

TEST_CASE("contraction_reduction norm matches the sampled form ratio") {
    Rng rng(1);
    for (int t = 0; t < 5; ++t) {
        std::size_t n = 3;
        CMatrix a = random_invertible(rng, n, 50.0);
        CMatrix b = random_invertible(rng, n, 50.0);
        FormFamily f = FormFamily::make({{a, b}});
        CMatrix u_i = rng.gaussian_matrix(n, n);
        CMatrix v = contraction_reduction(f, u_i, 0);
        double vnorm_op = operator_norm(v);
        double sampled = 0.0;
        for (int s = 0; s < 1000; ++s) {
            CVector x = random_unit_vector(rng, n);
            CVector y = random_unit_vector(rng, n);
            double denom = vnorm(a.apply(x)) * vnorm(b.apply(y));
            if (denom < 1e-12) continue;
            sampled = std::max(sampled, std::abs(inner(u_i.apply(x), y)) / denom);
        }
        CHECK(sampled <= vnorm_op + 1e-10);  // the norm bounds every sampled ratio
        // and the pair built from the top singular directions attains it
        SVDResult sv = svd(v);
        CVector xstar = inverse(a).apply(sv.v.column(0));
        CVector ystar = inverse(b).apply(sv.u.column(0));
        double attained = std::abs(inner(u_i.apply(xstar), ystar)) /
                          (vnorm(a.apply(xstar)) * vnorm(b.apply(ystar)));
        CHECK(attained == doctest::Approx(vnorm_op).epsilon(1e-9));
    }
}

TEST_CASE("contraction_reduction rejects non-invertible pairs") {
    CMatrix id = CMatrix::identity(2);
    CMatrix z = CMatrix::zero(2, 2);
    FormFamily f = FormFamily::make({{id, id}, {z, id}});
    CHECK_THROWS_AS(contraction_reduction(f, id, 1), IllConditioned);
}

TEST_CASE("decompose on the single identity pair returns the input") {
    Rng rng(2);
    FormFamily f = identity_family(3);
    CMatrix u = random_contraction(rng, 3, 0.9);
    DecomposeResult r = decompose(f, u);
    REQUIRE(r.status == SolveStatus::feasible);
    REQUIRE(r.decomposition.terms.size() == 1);
    CHECK(max_abs_diff(r.decomposition.terms[0], u) <= 1e-8);
    CHECK(r.decomposition.per_term_norms[0] <= 1.0 + 1e-12);
}

TEST_CASE("decompose splits the displayed counterexample operator") {
    FormFamily f = counterexample_family();
    CMatrix u{{5.0, 1.0}, {1.0, 3.0}};
    DecomposeResult r = decompose(f, u, 1e-8, 20000);
    REQUIRE(r.status == SolveStatus::feasible);
    CHECK(r.decomposition.residual <= 1e-8);
    for (double nv : r.decomposition.per_term_norms) CHECK(nv <= 1.0 + 1e-10);
    VerifyReport check = verify_decomposition(f, u, r.decomposition.terms, 1e-8);
    CHECK(check.ok);
}

TEST_CASE("decompose solves constructed two-term instances") {
    Rng rng(3);
    for (int t = 0; t < 8; ++t) {
        std::size_t n = 2 + t % 3;
        TwoTermInstance inst = random_two_term(rng, n, 0.99);
        DecomposeResult r = decompose(inst.family, inst.u, 1e-8, 20000);
        REQUIRE(r.status == SolveStatus::feasible);
        CHECK(r.decomposition.residual <= 1e-8);
        for (double nv : r.decomposition.per_term_norms) CHECK(nv <= 1.0 + 1e-8);
    }
}

TEST_CASE("decompose residual trace is non-increasing on feasible instances") {
    Rng rng(4);
    TwoTermInstance inst = random_two_term(rng, 3, 0.99);
    DecomposeResult r = decompose(inst.family, inst.u, 1e-8, 20000);
    REQUIRE(r.status == SolveStatus::feasible);
    for (std::size_t k = 1; k < r.residual_trace.size(); ++k)
        CHECK(r.residual_trace[k] <= r.residual_trace[k - 1] + 1e-12);
}

TEST_CASE("decompose scaling equivariance") {
    Rng rng(5);
    TwoTermInstance inst = random_two_term(rng, 2, 0.95);
    DecomposeResult full = decompose(inst.family, inst.u, 1e-8, 20000);
    REQUIRE(full.status == SolveStatus::feasible);
    for (double s : {0.7, 0.3}) {
        DecomposeResult scaled = decompose(inst.family, s * inst.u, 1e-8, 20000);
        REQUIRE(scaled.status == SolveStatus::feasible);
        CHECK(scaled.decomposition.residual <= 1e-8);
    }
}

TEST_CASE("decompose refuses non-invertible families") {
    CMatrix id = CMatrix::identity(2);
    CMatrix z = CMatrix::zero(2, 2);
    FormFamily f = FormFamily::make({{z, z}, {id, id}});
    CHECK_THROWS_AS(decompose(f, id), IllConditioned);
}

TEST_CASE("eps_decompose pushes mass off a zero pair") {
    CMatrix id = CMatrix::identity(2);
    CMatrix z = CMatrix::zero(2, 2);
    FormFamily f = FormFamily::make({{z, z}, {id, id}});
    Rng rng(6);
    CMatrix u = random_contraction(rng, 2, 0.9);
    EpsDecomposeResult r = eps_decompose(f, u);
    REQUIRE(r.result.status == SolveStatus::feasible);
    CHECK(r.eps_used <= 1e-10);
    // term 1 obeys the vanishing eps bound, term 2 carries U
    double eps = r.eps_used;
    CHECK(operator_norm(r.result.decomposition.terms[0]) <= eps * (1.0 + 1e-6));
    CHECK(max_abs_diff(r.result.decomposition.terms[1], u) <= 1e-5);
    CHECK(r.trajectory.size() >= 2);
}

TEST_CASE("eps_decompose agrees with decompose on invertible families") {
    Rng rng(7);
    TwoTermInstance inst = random_two_term(rng, 2, 0.9);
    DecomposeResult direct = decompose(inst.family, inst.u, 1e-10, 40000);
    REQUIRE(direct.status == SolveStatus::feasible);
    EpsDecomposeResult reg = eps_decompose(inst.family, inst.u, {1e-8}, 1e-10, 40000);
    REQUIRE(reg.result.status == SolveStatus::feasible);
    for (std::size_t i = 0; i < direct.decomposition.terms.size(); ++i)
        CHECK(max_abs_diff(direct.decomposition.terms[i], reg.result.decomposition.terms[i]) <=
              1e-6);
}

TEST_CASE("eps_decompose of zero is zero at every grid point") {
    CMatrix id = CMatrix::identity(2);
    CMatrix z = CMatrix::zero(2, 2);
    FormFamily f = FormFamily::make({{z, z}, {id, id}});
    EpsDecomposeResult r = eps_decompose(f, CMatrix::zero(2, 2));
    REQUIRE(r.result.status == SolveStatus::feasible);
    for (const auto& t : r.result.decomposition.terms) CHECK(t.max_abs() <= 1e-12);
    for (const auto& step : r.trajectory) CHECK(step.status == SolveStatus::feasible);
}

TEST_CASE("find_separating_form on the counterexample") {
    FormFamily f = counterexample_family();
    CMatrix t0 = 0.125 * CMatrix::identity(2);
    SeparatingForm sf = find_separating_form(f, t0, 1e-6, 1);
    CHECK(sf.certificate.delta_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sf.certificate.dual_pair_value > 1.0 + 1e-3);
    SearchConfig cfg;
    cfg.seed = 42;
    CHECK(kstar_gauge(f, sf.u_star, cfg).value <= 1.0 + 1e-6);
    MESSAGE("separated pair value: ", sf.certificate.dual_pair_value);
}

TEST_CASE("find_separating_form realizes trace duality for the identity pair") {
    Rng rng(8);
    FormFamily f = identity_family(2);
    CMatrix m = rng.gaussian_matrix(2, 2);
    CMatrix t0 = (2.0 / trace_norm(m)) * m;  // trace norm exactly 2
    SeparatingForm sf = find_separating_form(f, t0, 1e-6, 3);
    CHECK(sf.certificate.dual_pair_value == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(operator_norm(sf.u_star) <= 1.0 + 1e-6);
}

TEST_CASE("find_separating_form rejects interior points") {
    FormFamily f = counterexample_family();
    CMatrix inside = 0.05 * CMatrix::identity(2);  // delta gauge 0.4
    CHECK_THROWS_AS(find_separating_form(f, inside, 1e-6, 1), PreconditionFailed);
}

TEST_CASE("find_certificate stays silent on decomposable operators") {
    Rng rng(9);
    for (int t = 0; t < 4; ++t) {
        TwoTermInstance inst = random_two_term(rng, 2, 0.9);
        auto cert = find_certificate(inst.family, inst.u, 11 + t);
        CHECK_FALSE(cert.has_value());
    }
}

TEST_CASE("find_certificate separates the separated form") {
    FormFamily f = counterexample_family();
    CMatrix t0 = 0.125 * CMatrix::identity(2);
    SeparatingForm sf = find_separating_form(f, t0, 1e-6, 1);
    auto cert = find_certificate(f, sf.u_star, 5);
    REQUIRE(cert.has_value());
    CHECK(cert->delta_value <= 1.0 + 1e-8);
    CHECK(cert->dual_pair_value > 1.0);
    // the certificate survives the full certification path
    DecomposeResult r = decompose_with_certification(f, sf.u_star, 1e-8, 20000, 5);
    CHECK(r.status == SolveStatus::certified_infeasible);
}

TEST_CASE("verify_decomposition accepts exact witnesses and flags violations") {
    FormFamily f = counterexample_family();
    CMatrix id = CMatrix::identity(2);
    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    CMatrix c{{2.0, 1.0}, {1.0, 1.0}};
    CMatrix u{{5.0, 1.0}, {1.0, 3.0}};
    VerifyReport good = verify_decomposition(f, u, {id, a, c});
    CHECK(good.ok);
    CHECK(good.sum_residual <= 1e-15);
    for (double s : good.slack) CHECK(s >= -1e-10);

    // scale one term over its bound by 10%
    VerifyReport bad = verify_decomposition(f, u, {1.1 * id, a - 0.1 * id, c});
    CHECK_FALSE(bad.ok);
    CHECK(bad.term_ratio[0] == doctest::Approx(1.1).epsilon(1e-10));
    CHECK(bad.violating_pair.has_value());
    if (bad.violating_pair) {
        auto& [x, y] = *bad.violating_pair;
        double ratio = std::abs(inner((1.1 * id).apply(x), y)) / (vnorm(x) * vnorm(y));
        CHECK(ratio > 1.0 + 1e-8);
    }
}

TEST_CASE("verify_decomposition of an empty split of zero") {
    FormFamily f = counterexample_family();
    VerifyReport rep = verify_decomposition(f, CMatrix::zero(2, 2), {});
    CHECK(rep.ok);
}

TEST_CASE("verify_decomposition samples non-invertible pairs") {
    CMatrix id = CMatrix::identity(2);
    CMatrix z = CMatrix::zero(2, 2);
    FormFamily f = FormFamily::make({{z, z}, {id, id}});
    Rng rng(10);
    CMatrix u = random_contraction(rng, 2, 0.9);
    VerifyReport rep = verify_decomposition(f, u, {z, u});
    CHECK(rep.ok);
    // a nonzero term against the zero pair is an immediate violation
    VerifyReport bad = verify_decomposition(f, u, {0.5 * id, u - 0.5 * id});
    CHECK_FALSE(bad.ok);
}
