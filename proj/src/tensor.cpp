#include "formdecomp/tensor.hpp"

#include <cmath>

#include "formdecomp/errors.hpp"
#include "formdecomp/linalg.hpp"

namespace formdecomp {

void TensorRep::validate() const {
    if (pairs.empty()) return;
    const std::size_t dh = pairs.front().first.size();
    const std::size_t dk = pairs.front().second.size();
    if (dh == 0 || dk == 0) throw InvalidInput("tensor rep: zero-dimensional vector");
    for (const auto& [x, y] : pairs) {
        if (x.size() != dh || y.size() != dk)
            throw InvalidInput("tensor rep: inconsistent dimensions");
        if (!vfinite(x) || !vfinite(y)) throw InvalidInput("tensor rep: non-finite entry");
    }
}

CMatrix induced_matrix(const TensorRep& w) {
    w.validate();
    if (w.empty()) throw InvalidInput("induced_matrix: empty representation");
    CMatrix m(w.dim_k(), w.dim_h());
    for (const auto& [x, y] : w.pairs)
        for (std::size_t i = 0; i < y.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j) m(i, j) += y[i] * x[j];
    return m;
}

double pi_norm(const TensorRep& w) {
    w.validate();
    if (w.empty()) return 0.0;
    return trace_norm(induced_matrix(w));
}

TensorRep canonical_rep(const TensorRep& w) {
    w.validate();
    if (w.empty()) return {};
    CMatrix m = induced_matrix(w);
    SVDResult d = svd(m);
    double smax = d.s.empty() ? 0.0 : d.s.front();
    TensorRep out;
    for (std::size_t k = 0; k < d.s.size(); ++k) {
        // Rank truncation: treat singular values below 1e-12 * s_max as zero.
        if (d.s[k] <= 1e-12 * smax || d.s[k] == 0.0) break;
        double r = std::sqrt(d.s[k]);
        CVector eta = vscale(r, d.u.column(k));
        CVector xi(m.cols());
        for (std::size_t j = 0; j < m.cols(); ++j) xi[j] = r * std::conj(d.v(j, k));
        out.pairs.emplace_back(std::move(xi), std::move(eta));
    }
    return out;
}

TensorRep apply_pair(const CMatrix& c, const CMatrix& d, const TensorRep& w) {
    w.validate();
    TensorRep out;
    out.pairs.reserve(w.size());
    for (const auto& [x, y] : w.pairs) out.pairs.emplace_back(c.apply(x), d.apply(y));
    return out;
}

namespace {

void require_invertible(const CMatrix& m, const char* who) {
    if (!m.square()) throw InvalidInput(std::string(who) + ": operator must be square");
    if (cond_2(m) > kCondMax)
        throw IllConditioned(std::string(who) + ": condition number above threshold");
}

// Coefficients of v against an orthogonal (not orthonormal) family.
Complex coeff_against(const CVector& v, const CVector& basis_vec) {
    double n2 = vnorm(basis_vec);
    return inner(v, basis_vec) / (n2 * n2);
}

}  // namespace

AlphaBeta alpha_beta(const TensorRep& w_canon, const CMatrix& c, const CMatrix& d) {
    w_canon.validate();
    require_invertible(c, "alpha_beta: C");
    require_invertible(d, "alpha_beta: D");
    if (w_canon.empty()) return AlphaBeta{CMatrix::identity(1), CMatrix::identity(1), {}};

    TensorRep moved = apply_pair(c, d, w_canon);
    TensorRep rs = canonical_rep(moved);
    const std::size_t n = w_canon.size();
    if (rs.size() != n)
        throw IllConditioned("alpha_beta: rank changed under C (x) D");

    CMatrix alpha(n, n), beta(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        CVector cxi = c.apply(w_canon.pairs[i].first);
        CVector deta = d.apply(w_canon.pairs[i].second);
        for (std::size_t j = 0; j < n; ++j) {
            alpha(i, j) = coeff_against(cxi, rs.pairs[j].first);
            beta(i, j) = coeff_against(deta, rs.pairs[j].second);
        }
    }
    return AlphaBeta{std::move(alpha), std::move(beta), std::move(rs)};
}

HatSystem hat_construction(const TensorRep& w_canon, const CMatrix& c, const CMatrix& d) {
    AlphaBeta ab = alpha_beta(w_canon, c, d);
    const std::size_t n = w_canon.size();
    HatSystem h;
    if (n == 0) return h;

    SVDResult sv = svd(ab.alpha);
    h.u_mat = sv.u;
    h.v_mat = sv.v.adjoint();  // alpha = u_mat * diag(d) * v_mat
    h.d = sv.s;

    h.min_gap = sv.s.front();
    for (std::size_t i = 0; i + 1 < n; ++i) h.min_gap = std::min(h.min_gap, sv.s[i] - sv.s[i + 1]);
    h.degenerate = (n > 1) && (h.min_gap < 1e-8 * sv.s.front());

    const std::size_t dh = w_canon.dim_h();
    const std::size_t dk = w_canon.dim_k();
    h.xi_hat.assign(n, CVector(dh, Complex(0.0, 0.0)));
    h.eta_hat.assign(n, CVector(dk, Complex(0.0, 0.0)));
    h.rho_hat.assign(n, CVector(dh, Complex(0.0, 0.0)));
    h.sigma_hat.assign(n, CVector(dk, Complex(0.0, 0.0)));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Complex u_ji = h.u_mat(j, i);
            Complex v_ij = h.v_mat(i, j);
            // xi_hat_i = sum_j conj(u_ji) xi_j,   eta_hat_i = sum_j u_ji eta_j,
            // rho_hat_i = sum_j v_ij rho_j,       sigma_hat_i = sum_j conj(v_ij) sigma_j.
            h.xi_hat[i] = vadd(std::move(h.xi_hat[i]),
                               vscale(std::conj(u_ji), w_canon.pairs[j].first));
            h.eta_hat[i] =
                vadd(std::move(h.eta_hat[i]), vscale(u_ji, w_canon.pairs[j].second));
            h.rho_hat[i] =
                vadd(std::move(h.rho_hat[i]), vscale(v_ij, ab.rho_sigma.pairs[j].first));
            h.sigma_hat[i] = vadd(std::move(h.sigma_hat[i]),
                                  vscale(std::conj(v_ij), ab.rho_sigma.pairs[j].second));
        }
    }
    return h;
}

TwoTermBound two_term_estimate(const CMatrix& u, const TensorRep& w, const CMatrix& c,
                               const CMatrix& d) {
    w.validate();
    if (w.empty()) return TwoTermBound{0.0, 0.0};
    Complex acc = 0.0;
    for (const auto& [x, y] : w.pairs) acc += inner(u.apply(x), y);
    double lhs = std::abs(acc);
    // The sesquilinear pairing sums to tr(U G) for G = sum x_i y_i^dagger,
    // so the projective norms are those of the bar-conjugated tensor:
    // pi = |G|_1 and pi of the moved tensor = |C G D^dagger|_1.
    CMatrix g = CMatrix::zero(w.dim_h(), w.dim_k());
    for (const auto& [x, y] : w.pairs) g += outer(x, y);
    double rhs = trace_norm(g) + trace_norm(c * g * d.adjoint());
    return TwoTermBound{lhs, rhs};
}

CompatReport three_term_compat(const TensorRep& w_canon, const CMatrix& c, const CMatrix& d,
                               const CMatrix& e, const CMatrix& f) {
    AlphaBeta first = alpha_beta(w_canon, c, d);
    AlphaBeta second = alpha_beta(w_canon, e, f);

    SVDResult s1 = svd(first.alpha);
    SVDResult s2 = svd(second.alpha);

    CompatReport rep;
    rep.u_first = s1.u;
    rep.u_second = s2.u;
    rep.d_first = s1.s;
    rep.d_second = s2.s;

    auto min_gap = [](const std::vector<double>& s) {
        double g = s.empty() ? 0.0 : s.front();
        for (std::size_t i = 0; i + 1 < s.size(); ++i) g = std::min(g, s[i] - s[i + 1]);
        return g;
    };
    double top = std::max(s1.s.empty() ? 0.0 : s1.s.front(), s2.s.empty() ? 0.0 : s2.s.front());
    rep.degenerate = (s1.s.size() > 1) &&
                     (min_gap(s1.s) < 1e-8 * top || min_gap(s2.s) < 1e-8 * top);
    rep.max_entry_diff = max_abs_diff(s1.u, s2.u);
    rep.compatible = rep.max_entry_diff <= 1e-8;
    return rep;
}

}  // namespace formdecomp
