#include "formdecomp/counterexample.hpp"

#include <cmath>

#include "formdecomp/errors.hpp"
#include "formdecomp/linalg.hpp"

namespace formdecomp {

FormFamily CounterexampleInstance::family() const {
    CMatrix id = CMatrix::identity(A.rows());
    return FormFamily::make({{id, id}, {A, id}, {C, id}});
}

CounterexampleInstance build_instance() {
    CMatrix a{{2.0, 0.0}, {0.0, 1.0}};
    CMatrix c{{2.0, 1.0}, {1.0, 1.0}};
    CMatrix u{{5.0, 1.0}, {1.0, 3.0}};
    return build_instance(a, c, u);
}

CounterexampleInstance build_instance(const CMatrix& a, const CMatrix& c_mat, const CMatrix& u,
                                      double c_scale) {
    if (!a.square() || !c_mat.square() || !u.square() || a.rows() != c_mat.rows() ||
        a.rows() != u.rows())
        throw InvalidInput("counterexample: operators must be square and same size");
    double scale = std::max({1.0, a.max_abs(), c_mat.max_abs()});
    if (!a.is_hermitian(1e-12 * scale) || !c_mat.is_hermitian(1e-12 * scale))
        throw InvalidInput("counterexample: A and C must be Hermitian");
    EigResult ea = hermitian_eig(a);
    EigResult ec = hermitian_eig(c_mat);
    if (ea.values.back() <= 0.0 || ec.values.back() <= 0.0)
        throw InvalidInput("counterexample: A and C must be positive definite");
    if (max_abs_diff(a * c_mat, c_mat * a) == 0.0)
        throw InvalidInput("counterexample: A and C must not commute");

    CounterexampleInstance inst;
    inst.A = a;
    inst.C = c_mat;
    inst.U = u;
    CMatrix id = CMatrix::identity(a.rows());
    double total = trace_norm(id) + trace_norm(a) + trace_norm(c_mat);
    inst.c = c_scale > 0.0 ? c_scale : 1.0 / total;
    inst.T0 = inst.c * id;
    return inst;
}

CounterexampleReport verify_all(const CounterexampleInstance& inst, std::uint64_t seed) {
    CounterexampleReport rep;
    FormFamily fam = inst.family();

    // Stage 1: the exact gauge values of T0.
    rep.n1 = trace_norm(inst.T0);
    rep.n2 = trace_norm(inst.A * inst.T0);
    rep.n3 = trace_norm(inst.C * inst.T0);
    rep.delta_value = delta_gauge(fam, inst.T0);
    {
        StageResult s;
        s.name = "delta-gauge";
        s.value = rep.delta_value;
        s.pass = std::abs(rep.delta_value - 1.0) <= 1e-12;
        s.detail = "N1+N2+N3 with T0 on the Delta sphere";
        rep.stages.push_back(s);
    }

    // Stage 2: U is majorized; in fact U = I + A + C entrywise.
    {
        StageResult s;
        s.name = "majorization";
        CMatrix sum = CMatrix::identity(inst.A.rows()) + inst.A + inst.C;
        double entry_diff = max_abs_diff(sum, inst.U);
        SearchConfig cfg;
        cfg.seed = seed;
        KStarResult ks = kstar_gauge(fam, inst.U, cfg);
        rep.kstar_value = ks.value;
        s.value = ks.value;
        s.pass = entry_diff <= 1e-12 && ks.value <= 1.0 + 1e-9;
        s.detail = "kstar of U and the I+A+C identity";
        rep.stages.push_back(s);
    }

    // Stage 3: T0 sits in Delta but outside conv(K).
    {
        StageResult s;
        s.name = "non-membership";
        MembershipResult mem = in_convk_full(fam, inst.T0, 1e-6, seed);
        rep.convk_lower = mem.report.convk_lower;
        rep.convk_upper = mem.report.convk_upper;
        s.value = mem.report.convk_lower;
        s.pass = mem.status == Membership::outside;
        s.detail = "conv(K) gauge bounds for T0";
        rep.stages.push_back(s);
    }

    // Stage 4: the separated form is majorized yet non-decomposable.
    {
        StageResult s;
        s.name = "separation";
        try {
            SeparatingForm sf = find_separating_form(fam, inst.T0, 1e-6, seed);
            rep.separation_value = sf.certificate.dual_pair_value;
            DecomposeResult dec = decompose(fam, sf.u_star, 1e-8, 20000);
            bool chain = sf.certificate.delta_value <= 1.0 + 1e-8 &&
                         sf.certificate.dual_pair_value > 1.0 + 1e-6;
            if (dec.status == SolveStatus::undecided && chain) {
                dec.status = SolveStatus::certified_infeasible;
                dec.certificate = sf.certificate;
            }
            s.value = sf.certificate.dual_pair_value;
            s.pass = dec.status == SolveStatus::certified_infeasible;
            rep.separated = std::move(sf);
        } catch (const PreconditionFailed&) {
            s.pass = false;
        }
        s.detail = "tr(U* T0) > 1 with decompose(U*) certified infeasible";
        rep.stages.push_back(s);
    }

    // Stage 5: the displayed U itself decomposes (terms I, A, C work).
    {
        StageResult s;
        s.name = "decompose-displayed-u";
        DecomposeResult dec = decompose(fam, inst.U, 1e-8, 20000);
        rep.decompose_residual = dec.decomposition.residual;
        s.value = dec.decomposition.residual;
        s.pass = dec.status == SolveStatus::feasible;
        s.detail = "alternating projections find a feasible split of U";
        rep.stages.push_back(s);
    }

    rep.all_pass = true;
    for (const auto& s : rep.stages) rep.all_pass = rep.all_pass && s.pass;
    return rep;
}

TraceEqualityReport trace_equality_check(const CMatrix& s,
                            const std::vector<std::pair<CVector, CVector>>& rep) {
    if (!s.square()) throw InvalidInput("trace_equality_check: S must be square");
    double scale = std::max(1.0, s.max_abs());
    if (!s.is_hermitian(1e-10 * scale)) throw InvalidInput("trace_equality_check: S must be Hermitian");
    EigResult e = hermitian_eig(s);
    if (e.values.back() < -1e-10 * scale)
        throw InvalidInput("trace_equality_check: S must be positive semidefinite");

    CMatrix sum = CMatrix::zero(s.rows(), s.cols());
    for (const auto& [x, y] : rep) {
        if (x.size() != s.rows() || y.size() != s.cols())
            throw InvalidInput("trace_equality_check: representation dimension mismatch");
        sum += outer(x, y);
    }
    if (max_abs_diff(sum, s) > 1e-10 * (1.0 + scale))
        throw InvalidInput("trace_equality_check: representation does not reproduce S");

    TraceEqualityReport out;
    double tn = trace_norm(s);
    double total = 0.0;
    for (const auto& [x, y] : rep) total += vnorm(x) * vnorm(y);
    out.gap = total - tn;
    out.equality_holds = std::abs(out.gap) <= 1e-9 * std::max(1.0, tn);
    if (!out.equality_holds) return out;

    out.proportional = true;
    for (const auto& [x, y] : rep) {
        double nx = vnorm(x), ny = vnorm(y);
        if (nx * ny == 0.0) {
            out.alphas.push_back(0.0);
            continue;  // zero pair contributes nothing on either side
        }
        Complex alpha = inner(y, x) / (nx * nx);
        double resid = vnorm(vsub(CVector(y), vscale(alpha, x)));
        bool positive = alpha.real() > 0.0 && std::abs(alpha.imag()) <= 1e-8 * std::abs(alpha);
        if (resid > 1e-8 * ny || !positive) out.proportional = false;
        out.alphas.push_back(alpha.real());
    }
    return out;
}

std::optional<CVector> common_eigenvector(const CMatrix& m1, const CMatrix& m2, double tol) {
    if (!m1.square() || !m2.square() || m1.rows() != m2.rows())
        throw InvalidInput("common_eigenvector: matrices must be square and same size");
    double s1 = std::max(1.0, m1.max_abs()), s2 = std::max(1.0, m2.max_abs());
    if (!m1.is_hermitian(1e-10 * s1) || !m2.is_hermitian(1e-10 * s2))
        throw InvalidInput("common_eigenvector: Hermitian inputs required");

    EigResult e1 = hermitian_eig(m1);
    const std::size_t n = m1.rows();
    double cluster_tol = std::max(tol, 1e-10) * (1.0 + std::abs(e1.values.front()));

    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && std::abs(e1.values[end] - e1.values[start]) <= cluster_tol) ++end;

        // Restrict m2 to the eigenspace and diagonalize there.
        const std::size_t k = end - start;
        CMatrix q(n, k);
        for (std::size_t j = 0; j < k; ++j) q.set_column(j, e1.vectors.column(start + j));
        CMatrix p = q.adjoint() * m2 * q;
        EigResult e2 = hermitian_eig(p);
        for (std::size_t j = 0; j < k; ++j) {
            CVector v = q.apply(e2.vectors.column(j));
            double nv = vnorm(v);
            if (nv < 1e-12) continue;
            v = vscale(1.0 / nv, v);
            double lam1 = inner(m1.apply(v), v).real();
            double lam2 = inner(m2.apply(v), v).real();
            double r1 = vnorm(vsub(m1.apply(v), vscale(lam1, v)));
            double r2 = vnorm(vsub(m2.apply(v), vscale(lam2, v)));
            if (r1 <= tol * s1 && r2 <= tol * s2) return v;
        }
        start = end;
    }
    return std::nullopt;
}

}  // namespace formdecomp
