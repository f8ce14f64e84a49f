#include "formdecomp/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "formdecomp/errors.hpp"
#include "formdecomp/linalg.hpp"
#include "formdecomp/rng.hpp"

namespace formdecomp {

CMatrix contraction_reduction(const FormFamily& f, const CMatrix& u_i, std::size_t i) {
    if (i >= f.size()) throw InvalidInput("contraction_reduction: pair index out of range");
    const FormPair& p = f.pair(i);
    if (!p.invertible) throw IllConditioned("contraction_reduction: pair is not invertible");
    if (u_i.rows() != f.dim_k() || u_i.cols() != f.dim_h())
        throw InvalidInput("contraction_reduction: dimension mismatch");
    return inverse(p.b.adjoint()) * u_i * inverse(p.a);
}

namespace {

CMatrix clip_operator_norm(const CMatrix& m) {
    SVDResult d = svd(m);
    bool inside = true;
    for (double s : d.s)
        if (s > 1.0) inside = false;
    if (inside) return m;
    CMatrix sr = CMatrix::zero(m.rows(), m.cols());
    for (std::size_t k = 0; k < d.s.size(); ++k) sr(k, k) = std::min(d.s[k], 1.0);
    return d.u * sr * d.v.adjoint();
}

struct AffineProjector {
    const FormFamily* f;
    CMatrix g_inv;  // inverse of sum_i kron(conj(A_i^dagger A_i), B_i^dagger B_i)
    CMatrix target;

    CMatrix defect(const std::vector<CMatrix>& vs) const {
        CMatrix r = CMatrix::zero(f->dim_k(), f->dim_h());
        for (std::size_t i = 0; i < f->size(); ++i)
            r += f->pair(i).b.adjoint() * vs[i] * f->pair(i).a;
        return r - target;
    }

    // Minimum-norm correction onto {sum B_i^dagger V_i A_i = target}.
    void project(std::vector<CMatrix>& vs) const {
        CMatrix r = defect(vs);
        CVector z = g_inv.apply(vec_cols(r));
        CMatrix zmat = unvec_cols(z, f->dim_k(), f->dim_h());
        for (std::size_t i = 0; i < f->size(); ++i)
            vs[i] -= f->pair(i).b * zmat * f->pair(i).a.adjoint();
    }
};

AffineProjector make_affine_projector(const FormFamily& f, const CMatrix& u) {
    const std::size_t dim = f.dim_h() * f.dim_k();
    CMatrix g = CMatrix::zero(dim, dim);
    for (const auto& p : f.pairs()) {
        // (A^t (x) B^dagger)(A^t (x) B^dagger)^dagger = conj(A^dagger A) (x) (B^dagger B)
        CMatrix ga = (p.a.adjoint() * p.a).conjugate();
        CMatrix gb = p.b.adjoint() * p.b;
        g += kron(ga, gb);
    }
    return AffineProjector{&f, inverse(g), u};
}

}  // namespace

DecomposeResult decompose(const FormFamily& f, const CMatrix& u, double tol, int max_iter) {
    if (u.rows() != f.dim_k() || u.cols() != f.dim_h())
        throw InvalidInput("decompose: dimension mismatch");
    if (!u.is_finite()) throw InvalidInput("decompose: non-finite input");
    if (!f.all_invertible())
        throw IllConditioned("decompose: family has a non-invertible pair; use eps_decompose");

    const std::size_t n = f.size();
    DecomposeResult res;
    AffineProjector proj = make_affine_projector(f, u);

    std::vector<CMatrix> vs(n, CMatrix::zero(f.dim_k(), f.dim_h()));
    proj.project(vs);  // min-norm start on the affine set
    std::vector<CMatrix> corr(n, CMatrix::zero(f.dim_k(), f.dim_h()));

    const double uscale = 1.0 + u.frobenius_norm();
    std::vector<CMatrix> ball(n, CMatrix::zero(f.dim_k(), f.dim_h()));

    int iter = 0;
    double resid = 0.0;
    for (; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            CMatrix shifted = vs[i] + corr[i];
            ball[i] = clip_operator_norm(shifted);
            corr[i] = shifted - ball[i];
        }
        resid = proj.defect(ball).frobenius_norm() / uscale;
        res.residual_trace.push_back(resid);
        if (resid <= tol) break;
        vs = ball;
        proj.project(vs);
    }

    Decomposition dec;
    dec.iterations = iter < max_iter ? iter + 1 : max_iter;
    dec.witnesses = ball;
    for (std::size_t i = 0; i < n; ++i) {
        dec.terms.push_back(f.pair(i).b.adjoint() * ball[i] * f.pair(i).a);
        dec.per_term_norms.push_back(operator_norm(ball[i]));
    }
    CMatrix total = CMatrix::zero(f.dim_k(), f.dim_h());
    for (const auto& t : dec.terms) total += t;
    dec.residual = (total - u).frobenius_norm() / uscale;
    res.decomposition = std::move(dec);

    if (resid <= tol) {
        VerifyReport check = verify_decomposition(f, u, res.decomposition.terms, tol);
        res.status = check.ok ? SolveStatus::feasible : SolveStatus::undecided;
    } else {
        res.status = SolveStatus::undecided;
    }
    return res;
}

DecomposeResult decompose_with_certification(const FormFamily& f, const CMatrix& u, double tol,
                                             int max_iter, std::uint64_t seed) {
    DecomposeResult res = decompose(f, u, tol, max_iter);
    if (res.status != SolveStatus::undecided) return res;
    auto cert = find_certificate(f, u, seed);
    if (cert) {
        res.status = SolveStatus::certified_infeasible;
        res.certificate = std::move(*cert);
    }
    return res;
}

std::vector<double> default_eps_grid() {
    std::vector<double> grid;
    double eps = 1.0;
    for (int k = 0; k <= 20; ++k) {
        grid.push_back(eps);
        eps *= 0.25;
    }
    return grid;
}

EpsDecomposeResult eps_decompose(const FormFamily& f, const CMatrix& u,
                                 std::vector<double> eps_grid, double tol, int max_iter) {
    if (eps_grid.empty()) eps_grid = default_eps_grid();
    for (double e : eps_grid)
        if (!(e > 0.0)) throw InvalidInput("eps_decompose: grid entries must be positive");
    std::sort(eps_grid.begin(), eps_grid.end(), std::greater<double>());

    EpsDecomposeResult out;
    bool have_feasible = false;
    DecomposeResult last_attempt;
    for (double eps : eps_grid) {
        std::vector<std::pair<CMatrix, CMatrix>> regs;
        for (const auto& p : f.pairs())
            regs.emplace_back(eps_regularize(p.a, eps), eps_regularize(p.b, eps));
        FormFamily feps = FormFamily::make(std::move(regs));
        DecomposeResult r = decompose(feps, u, tol, max_iter);

        EpsDecomposeStep step;
        step.eps = eps;
        step.status = r.status;
        step.per_term_norms = r.decomposition.per_term_norms;
        step.residual = r.decomposition.residual;
        out.trajectory.push_back(std::move(step));

        if (r.status == SolveStatus::feasible) {
            out.result = std::move(r);
            out.eps_used = eps;
            have_feasible = true;
        } else if (have_feasible) {
            break;  // feasibility only tightens as eps shrinks
        } else {
            last_attempt = std::move(r);
        }
    }
    if (!have_feasible) {
        out.result = std::move(last_attempt);
        out.result.status = SolveStatus::undecided;
        out.eps_used = eps_grid.back();
    }
    return out;
}

namespace {

CMatrix normalize_frobenius(const CMatrix& m) {
    double n = m.frobenius_norm();
    if (n < 1e-150) return m;
    return (1.0 / n) * m;
}

// Re tr(U T) - delta_gauge(T): concave and positively homogeneous; any
// positive value scales into a separation certificate.
double margin_value(const FormFamily& f, const CMatrix& u, const CMatrix& t) {
    return pairing(u, t) - delta_gauge(f, t);
}

CMatrix margin_supergradient(const FormFamily& f, const CMatrix& u, const CMatrix& t) {
    CMatrix g = u.adjoint();
    for (const auto& p : f.pairs()) {
        SVDResult sv = svd(p.a * t * p.b.adjoint());
        std::size_t k = sv.s.size();
        CMatrix q(sv.u.rows(), sv.v.rows());
        for (std::size_t i = 0; i < sv.u.rows(); ++i)
            for (std::size_t j = 0; j < sv.v.rows(); ++j) {
                Complex acc = 0.0;
                for (std::size_t l = 0; l < k; ++l)
                    if (sv.s[l] > 1e-14 * sv.s.front()) acc += sv.u(i, l) * std::conj(sv.v(j, l));
                q(i, j) = acc;
            }
        g -= p.a.adjoint() * q * p.b;
    }
    return g;
}

}  // namespace

std::optional<SeparationCertificate> find_certificate(const FormFamily& f, const CMatrix& u,
                                                      std::uint64_t seed, double margin) {
    const std::size_t dh = f.dim_h(), dk = f.dim_k();
    Rng rng(seed);

    std::vector<CMatrix> starts;
    starts.push_back(normalize_frobenius(u.adjoint()));
    if (dh == dk) starts.push_back(normalize_frobenius(CMatrix::identity(dh)));
    for (int k = 0; k < 3; ++k) starts.push_back(normalize_frobenius(rng.gaussian_matrix(dh, dk)));

    CMatrix best_t = starts.front();
    double best = margin_value(f, u, best_t);
    for (const auto& s : starts) {
        CMatrix t = s;
        double val = margin_value(f, u, t);
        if (val > best) {
            best = val;
            best_t = t;
        }
        double step0 = 0.25;
        for (int it = 0; it < 800; ++it) {
            CMatrix grad = margin_supergradient(f, u, t);
            double gn = grad.frobenius_norm();
            if (gn < 1e-14) break;
            double alpha = step0 / std::sqrt(static_cast<double>(it + 1));
            t = normalize_frobenius(t + (alpha / gn) * grad);
            double v = margin_value(f, u, t);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
    }

    if (best <= margin) return std::nullopt;
    double delta = delta_gauge(f, best_t);
    if (delta < 1e-150) return std::nullopt;
    SeparationCertificate cert;
    cert.t0 = (1.0 / delta) * best_t;
    cert.delta_value = delta_gauge(f, cert.t0);
    cert.dual_pair_value = pairing(u, cert.t0);
    if (cert.dual_pair_value <= 1.0 + margin) return std::nullopt;
    return cert;
}

SeparatingForm find_separating_form(const FormFamily& f, const CMatrix& t0, double tol,
                                    std::uint64_t seed) {
    double delta0 = delta_gauge(f, t0);
    // The dual run itself certifies the exclusion; the Delta shortcut of
    // in_convk would not produce a separating operator.
    GaugeReport rep = convk_gauge(f, t0, tol, seed);
    if (rep.convk_lower <= 1.0 + tol)
        throw PreconditionFailed("find_separating_form: T0 not certified outside conv(K)");
    MembershipResult mem;
    mem.status = Membership::outside;
    mem.report = std::move(rep);

    CMatrix u_star = mem.report.dual_w;
    SearchConfig cfg;
    cfg.starts = 96;
    cfg.seed = seed * 7919 + 99;
    std::vector<std::pair<CVector, CVector>> starts;
    for (const auto& a : mem.report.atoms) starts.emplace_back(a.x, a.y);
    KStarResult ks = kstar_gauge(f, u_star, cfg, starts);
    if (ks.value > 1.0) u_star = (1.0 / ks.value) * u_star;

    SeparatingForm out;
    out.u_star = std::move(u_star);
    out.certificate.t0 = t0;
    out.certificate.delta_value = delta0;
    out.certificate.dual_pair_value = pairing(out.u_star, t0);
    out.certificate.generating_atoms = mem.report.atoms;
    out.gauge = std::move(mem.report);
    return out;
}

VerifyReport verify_decomposition(const FormFamily& f, const CMatrix& u,
                                  const std::vector<CMatrix>& terms, double sum_tol,
                                  std::uint64_t seed) {
    VerifyReport rep;
    if (terms.size() != f.size()) {
        if (terms.empty() && u.max_abs() == 0.0) {
            rep.ok = rep.sum_ok = true;
            return rep;
        }
        throw InvalidInput("verify_decomposition: one term per pair required");
    }

    CMatrix total = CMatrix::zero(u.rows(), u.cols());
    for (const auto& t : terms) total += t;
    rep.sum_residual = (total - u).frobenius_norm() / (1.0 + u.frobenius_norm());
    rep.sum_ok = rep.sum_residual <= sum_tol;

    Rng rng(seed);
    bool all_terms_ok = true;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        double ratio;
        bool ok;
        if (f.pair(i).invertible) {
            CMatrix v = contraction_reduction(f, terms[i], i);
            ratio = operator_norm(v);
            ok = ratio <= 1.0 + 1e-8;
            if (!ok && !rep.violating_pair) {
                SVDResult sv = svd(v);
                CVector x = inverse(f.pair(i).a).apply(sv.v.column(0));
                CVector y = inverse(f.pair(i).b).apply(sv.u.column(0));
                rep.violating_pair = std::make_pair(x, y);
            }
        } else {
            // Sampling fallback; 1e4 unit pairs per term.
            ratio = 0.0;
            ok = true;
            for (int s = 0; s < 10000; ++s) {
                CVector x = random_unit_vector(rng, f.dim_h());
                CVector y = random_unit_vector(rng, f.dim_k());
                double denom = vnorm(f.pair(i).a.apply(x)) * vnorm(f.pair(i).b.apply(y));
                double num = std::abs(inner(terms[i].apply(x), y));
                if (denom < 1e-14) {
                    if (num > 1e-12) {
                        ratio = std::numeric_limits<double>::infinity();
                        ok = false;
                        if (!rep.violating_pair) rep.violating_pair = std::make_pair(x, y);
                        break;
                    }
                    continue;
                }
                double r = num / denom;
                if (r > ratio) ratio = r;
                if (r > 1.0 + 1e-6) {
                    ok = false;
                    if (!rep.violating_pair) rep.violating_pair = std::make_pair(x, y);
                }
            }
        }
        rep.term_ratio.push_back(ratio);
        rep.slack.push_back(1.0 - ratio);
        rep.term_ok.push_back(ok);
        all_terms_ok = all_terms_ok && ok;
    }
    rep.ok = rep.sum_ok && all_terms_ok;
    return rep;
}

}  // namespace formdecomp
