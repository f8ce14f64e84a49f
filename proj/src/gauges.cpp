#include "formdecomp/gauges.hpp"

#include <algorithm>
#include <cmath>

#include "formdecomp/errors.hpp"
#include "formdecomp/linalg.hpp"
#include "formdecomp/rng.hpp"
#include "formdecomp/simplex.hpp"

namespace formdecomp {

FormFamily FormFamily::make(std::vector<std::pair<CMatrix, CMatrix>> pairs) {
    if (pairs.empty()) throw InvalidInput("family: at least one pair required");
    FormFamily f;
    f.dim_h_ = pairs.front().first.rows();
    f.dim_k_ = pairs.front().second.rows();
    for (auto& [a, b] : pairs) {
        if (!a.square() || !b.square()) throw InvalidInput("family: operators must be square");
        if (a.rows() != f.dim_h_ || b.rows() != f.dim_k_)
            throw InvalidInput("family: inconsistent dimensions");
        if (!a.is_finite() || !b.is_finite()) throw InvalidInput("family: non-finite operator");
        FormPair p;
        p.cond_a = cond_2(a);
        p.cond_b = cond_2(b);
        p.invertible = p.cond_a <= kCondMax && p.cond_b <= kCondMax;
        p.a = std::move(a);
        p.b = std::move(b);
        f.pairs_.push_back(std::move(p));
    }
    return f;
}

bool FormFamily::all_invertible() const {
    for (const auto& p : pairs_)
        if (!p.invertible) return false;
    return true;
}

double majorant(const FormFamily& f, const CVector& x, const CVector& y) {
    if (x.size() != f.dim_h() || y.size() != f.dim_k())
        throw InvalidInput("majorant: dimension mismatch");
    double g = 0.0;
    for (const auto& p : f.pairs()) g += vnorm(p.a.apply(x)) * vnorm(p.b.apply(y));
    return g;
}

double delta_gauge(const FormFamily& f, const CMatrix& t) {
    if (t.rows() != f.dim_h() || t.cols() != f.dim_k())
        throw InvalidInput("delta_gauge: dimension mismatch");
    if (!t.is_finite()) throw InvalidInput("delta_gauge: non-finite input");
    double v = 0.0;
    for (const auto& p : f.pairs()) v += trace_norm(p.a * t * p.b.adjoint());
    return v;
}

double pairing(const CMatrix& w, const CMatrix& t) { return (w * t).trace().real(); }

namespace {

// The stacked map x -> (A_1 x, ..., A_n x) must be injective, and likewise
// for the B side; otherwise the majorant vanishes on a nonzero pair.
void check_jointly_injective(const FormFamily& f) {
    auto stacked_min_sv = [](const std::vector<FormPair>& ps, bool side_a, std::size_t d) {
        CMatrix stack(ps.size() * d, d);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const CMatrix& m = side_a ? ps[i].a : ps[i].b;
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c) stack(i * d + r, c) = m(r, c);
        }
        SVDResult sv = svd(stack);
        return std::pair<double, double>(sv.s.back(), sv.s.front());
    };
    auto [amin, amax] = stacked_min_sv(f.pairs(), true, f.dim_h());
    if (amin <= 1e-12 * std::max(1.0, amax))
        throw DegenerateFamily("family: the A_i have a joint kernel");
    auto [bmin, bmax] = stacked_min_sv(f.pairs(), false, f.dim_k());
    if (bmin <= 1e-12 * std::max(1.0, bmax))
        throw DegenerateFamily("family: the B_i have a joint kernel");
}

struct FamilyGrams {
    std::vector<CMatrix> ata, btb;
};

FamilyGrams make_grams(const FormFamily& f) {
    FamilyGrams g;
    for (const auto& p : f.pairs()) {
        g.ata.push_back(p.a.adjoint() * p.a);
        g.btb.push_back(p.b.adjoint() * p.b);
    }
    return g;
}

struct RatioEval {
    double ratio2 = 0.0;  // |<Ux|y>|^2 / g^2
    Complex c = 0.0;
    double g = 0.0;
};

// Scratch buffers so the ascent inner loop never allocates.
struct AscentWork {
    CVector scratch, ux, uay, gx, gy, xc, yc;
    std::vector<double> na, nb;
};

bool normalize_inplace(CVector& v) {
    double n = vnorm(v);
    if (n < 1e-150) return false;
    double inv = 1.0 / n;
    for (auto& z : v) z *= inv;
    return true;
}

RatioEval eval_ratio(const FormFamily& f, const CMatrix& u, const CVector& x, const CVector& y,
                     AscentWork& w) {
    RatioEval r;
    u.apply_into(x, w.ux);
    r.c = inner(w.ux, y);
    const std::size_t n = f.size();
    w.na.resize(n);
    w.nb.resize(n);
    r.g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        f.pair(i).a.apply_into(x, w.scratch);
        w.na[i] = vnorm(w.scratch);
        f.pair(i).b.apply_into(y, w.scratch);
        w.nb[i] = vnorm(w.scratch);
        r.g += w.na[i] * w.nb[i];
    }
    if (r.g < 1e-150) {
        if (std::abs(r.c) > 1e-150)
            throw DegenerateFamily("kstar: majorant vanishes on a pair with nonzero form value");
        r.ratio2 = 0.0;
        return r;
    }
    r.ratio2 = std::norm(r.c) / (r.g * r.g);
    return r;
}

// Projected gradient ascent on |<Ux|y>|^2 / majorant^2 over the product of
// unit spheres, with backtracking line search.
RatioEval ascend(const FormFamily& f, const FamilyGrams& grams, const CMatrix& u,
                 const CMatrix& uadj, CVector& x, CVector& y, int max_iter, int& used_iters,
                 AscentWork& w) {
    const std::size_t n = f.size();
    if (!normalize_inplace(x)) {
        x.assign(f.dim_h(), Complex(0.0, 0.0));
        x[0] = 1.0;
    }
    if (!normalize_inplace(y)) {
        y.assign(f.dim_k(), Complex(0.0, 0.0));
        y[0] = 1.0;
    }

    RatioEval cur = eval_ratio(f, u, x, y, w);
    double step = 0.25;
    std::vector<double> na = w.na, nb = w.nb;

    for (used_iters = 0; used_iters < max_iter; ++used_iters) {
        if (cur.g < 1e-150) break;
        na = w.na;
        nb = w.nb;
        // Wirtinger gradients of the squared ratio.
        const double inv_g2 = 1.0 / (cur.g * cur.g);
        uadj.apply_into(y, w.gx);
        Complex cx = cur.c * inv_g2;
        for (auto& z : w.gx) z *= cx;
        u.apply_into(x, w.gy);
        Complex cy = std::conj(cur.c) * inv_g2;
        for (auto& z : w.gy) z *= cy;
        double coef = 2.0 * std::norm(cur.c) * inv_g2 / cur.g;
        for (std::size_t i = 0; i < n; ++i) {
            if (na[i] > 1e-150) {
                grams.ata[i].apply_into(x, w.scratch);
                double s = coef * nb[i] / (2.0 * na[i]);
                for (std::size_t k = 0; k < w.gx.size(); ++k) w.gx[k] -= s * w.scratch[k];
            }
            if (nb[i] > 1e-150) {
                grams.btb[i].apply_into(y, w.scratch);
                double s = coef * na[i] / (2.0 * nb[i]);
                for (std::size_t k = 0; k < w.gy.size(); ++k) w.gy[k] -= s * w.scratch[k];
            }
        }

        bool improved = false;
        while (step >= 1e-14) {
            w.xc.resize(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) w.xc[k] = x[k] + step * w.gx[k];
            w.yc.resize(y.size());
            for (std::size_t k = 0; k < y.size(); ++k) w.yc[k] = y[k] + step * w.gy[k];
            if (!normalize_inplace(w.xc) || !normalize_inplace(w.yc)) {
                step *= 0.5;
                continue;
            }
            RatioEval cand = eval_ratio(f, u, w.xc, w.yc, w);
            if (cand.ratio2 > cur.ratio2 * (1.0 + 1e-15) + 1e-300) {
                std::swap(x, w.xc);
                std::swap(y, w.yc);
                cur = cand;
                step = std::min(step * 1.4, 4.0);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    return cur;
}

}  // namespace

KStarResult kstar_gauge(const FormFamily& f, const CMatrix& u, const SearchConfig& cfg,
                        const std::vector<std::pair<CVector, CVector>>& extra_starts) {
    if (u.rows() != f.dim_k() || u.cols() != f.dim_h())
        throw InvalidInput("kstar_gauge: dimension mismatch");
    if (!u.is_finite()) throw InvalidInput("kstar_gauge: non-finite input");
    check_jointly_injective(f);

    KStarResult best;
    best.x.assign(f.dim_h(), Complex(0.0, 0.0));
    best.x[0] = 1.0;
    best.y.assign(f.dim_k(), Complex(0.0, 0.0));
    best.y[0] = 1.0;
    if (u.max_abs() == 0.0) {
        best.converged = true;
        return best;
    }

    FamilyGrams grams = make_grams(f);
    CMatrix uadj = u.adjoint();
    std::vector<std::pair<CVector, CVector>> starts;
    SVDResult usv = svd(u);
    for (std::size_t k = 0; k < usv.s.size(); ++k) {
        if (usv.s[k] <= 1e-14 * usv.s.front()) break;
        starts.emplace_back(usv.v.column(k), usv.u.column(k));
    }
    for (const auto& st : extra_starts) starts.push_back(st);
    Rng rng(cfg.seed);
    while (starts.size() < static_cast<std::size_t>(cfg.starts))
        starts.emplace_back(rng.gaussian_vector(f.dim_h()), rng.gaussian_vector(f.dim_k()));

    AscentWork work;
    std::vector<double> values;
    std::vector<std::pair<CVector, CVector>> locals;
    values.reserve(starts.size());
    for (auto& [sx, sy] : starts) {
        CVector x = sx, y = sy;
        int iters = 0;
        RatioEval r = ascend(f, grams, u, uadj, x, y, cfg.max_iter, iters, work);
        double val = std::sqrt(r.ratio2);
        values.push_back(val);
        locals.emplace_back(x, y);
        best.iterations += iters;
        if (val > best.value) {
            best.value = val;
            best.x = x;
            best.y = y;
            best.converged = iters < cfg.max_iter;
        }
    }
    for (double v : values)
        if (v >= best.value - 1e-9) ++best.starts_near_best;

    // Keep distinct locals above one as candidate cutting planes.
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<CMatrix> kept;
    for (std::size_t idx : order) {
        if (values[idx] <= 1.0 || best.hot_pairs.size() >= 8) break;
        CMatrix s = outer(locals[idx].first, locals[idx].second);
        bool dup = false;
        for (const auto& k : kept)
            if (max_abs_diff(k, s) < 1e-7) {
                dup = true;
                break;
            }
        if (dup) continue;
        kept.push_back(std::move(s));
        best.hot_pairs.push_back(locals[idx]);
    }
    return best;
}

namespace {

std::size_t vec_real_dim(const FormFamily& f) { return 2 * f.dim_h() * f.dim_k(); }

void fill_column_real(const CMatrix& s, double* out) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) {
            out[idx++] = s(i, j).real();
            out[idx++] = s(i, j).imag();
        }
}

// Dual vector -> operator W with Re tr(W S) = y . vecR(S) for every S.
CMatrix dual_to_operator(const std::vector<double>& dual, std::size_t dh, std::size_t dk) {
    CMatrix w(dk, dh);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dh; ++i)
        for (std::size_t j = 0; j < dk; ++j) {
            w(j, i) = Complex(dual[idx], -dual[idx + 1]);
            idx += 2;
        }
    return w;
}

struct AtomPair {
    CVector x, y;
};

// Scale a pair so the majorant equals one.
AtomPair normalize_atom(const FormFamily& f, CVector x, CVector y) {
    double g = majorant(f, x, y);
    if (g < 1e-150) throw DegenerateFamily("atom normalization: vanishing majorant");
    double r = std::sqrt(g);
    return AtomPair{vscale(1.0 / r, std::move(x)), vscale(1.0 / r, std::move(y))};
}

bool atom_duplicate(const std::vector<AtomPair>& atoms, const FormFamily& f, const CMatrix& s) {
    for (const auto& a : atoms) {
        (void)f;
        CMatrix existing = outer(a.x, a.y);
        if (max_abs_diff(existing, s) < 1e-9) return true;
    }
    return false;
}

}  // namespace

namespace {

// Rotates x so that <Wx|y> becomes real positive; the aligned atom is the
// supporting halfplane the LP dual actually violates.
AtomPair aligned_atom(const FormFamily& f, const CMatrix& w, const CVector& x,
                      const CVector& y) {
    Complex c = inner(w.apply(x), y);
    CVector xal = x;
    if (std::abs(c) > 0.0) xal = vscale(std::conj(c) / std::abs(c), std::move(xal));
    return normalize_atom(f, std::move(xal), y);
}

// A few phase copies per atom approximate the true disk constraint
// |tr(W S)| <= 1 instead of a single halfplane.
void push_atom_phases(std::vector<AtomPair>& atoms, const FormFamily& f, const AtomPair& base) {
    static const Complex phases[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    for (const Complex& ph : phases) {
        AtomPair rotated{vscale(ph, base.x), base.y};
        if (!atom_duplicate(atoms, f, outer(rotated.x, rotated.y)))
            atoms.push_back(std::move(rotated));
    }
}

}  // namespace

GaugeReport convk_gauge(const FormFamily& f, const CMatrix& t, double tol, std::uint64_t seed,
                        int max_rounds, bool stop_at_unit_upper) {
    if (t.rows() != f.dim_h() || t.cols() != f.dim_k())
        throw InvalidInput("convk_gauge: dimension mismatch");
    if (!t.is_finite()) throw InvalidInput("convk_gauge: non-finite input");
    check_jointly_injective(f);

    GaugeReport rep;
    rep.delta_value = delta_gauge(f, t);
    rep.dual_w = CMatrix::zero(f.dim_k(), f.dim_h());
    if (t.max_abs() == 0.0) {
        rep.converged = true;
        return rep;
    }
    // Meaningless until the first restricted LP has been solved.
    rep.convk_upper = std::numeric_limits<double>::infinity();

    const std::size_t dh = f.dim_h(), dk = f.dim_k();
    const std::size_t m = vec_real_dim(f);
    std::vector<double> b(m);
    fill_column_real(t, b.data());

    // Seed atoms with the singular pairs of T itself: the restricted LP is
    // then feasible from the first round.
    std::vector<AtomPair> atoms;
    SVDResult tsv = svd(t);
    for (std::size_t k = 0; k < tsv.s.size(); ++k) {
        if (tsv.s[k] <= 1e-14 * tsv.s.front()) break;
        push_atom_phases(atoms, f, normalize_atom(f, tsv.u.column(k), tsv.v.column(k)));
    }
    Rng rng(seed);
    for (std::size_t extra = 0; extra < 2 * dh * dk; ++extra)
        atoms.push_back(
            normalize_atom(f, random_unit_vector(rng, dh), random_unit_vector(rng, dk)));

    SearchConfig pricing;
    pricing.seed = seed * 0x9e3779b9ULL + 17;
    SearchConfig cheap = pricing;
    cheap.starts = 16;

    // Evaluating the ratio at every atom floors the dual estimate without
    // paying for a full ascent per atom; only the best few become starts.
    auto atom_floor_and_starts = [&](const CMatrix& cand,
                                     std::vector<std::pair<CVector, CVector>>& starts) {
        double floor_val = 0.0;
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(atoms.size());
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            double v = std::abs(inner(cand.apply(atoms[j].x), atoms[j].y));
            floor_val = std::max(floor_val, v);
            ranked.emplace_back(v, j);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t r = 0; r < ranked.size() && r < 8; ++r) {
            const AtomPair& at = atoms[ranked[r].second];
            starts.emplace_back(at.x, at.y);
        }
        return floor_val;
    };

    std::vector<double> lp_x;
    CMatrix best_w = rep.dual_w;  // unscaled candidate with the best lower bound
    double best_lower = 0.0;
    CMatrix w_avg = rep.dual_w;
    int duals_seen = 0;
    bool early_inside = false;

    // Closed-form candidate: for T = U S V^dagger the operator V U^dagger
    // pairs to the trace norm and is exactly dual-optimal for the single
    // identity pair.
    CMatrix w_svd = tsv.v * tsv.u.adjoint();

    auto consider_dual = [&](const CMatrix& cand, const SearchConfig& cfg) {
        pricing.seed += 1;
        SearchConfig c = cfg;
        c.seed = pricing.seed;
        std::vector<std::pair<CVector, CVector>> starts;
        double floor_val = atom_floor_and_starts(cand, starts);
        KStarResult ks = kstar_gauge(f, cand, c, starts);
        ks.value = std::max(ks.value, floor_val);
        double kappa = std::max(ks.value, 1e-30);
        double lower = pairing(cand, t) / kappa;
        if (lower > best_lower) {
            best_lower = lower;
            best_w = (1.0 / kappa) * cand;
        }
        return ks;
    };

    consider_dual(w_svd, cheap);

    int round = 0;
    double kappa_last = std::numeric_limits<double>::infinity();
    for (; round < max_rounds; ++round) {
        const std::size_t ncols = atoms.size();
        std::vector<double> a(m * ncols);
        std::vector<double> col(m);
        for (std::size_t j = 0; j < ncols; ++j) {
            CMatrix s = outer(atoms[j].x, atoms[j].y);
            fill_column_real(s, col.data());
            for (std::size_t i = 0; i < m; ++i) a[i * ncols + j] = col[i];
        }
        LpResult lp = solve_lp(a, m, ncols, b, std::vector<double>(ncols, 1.0));
        if (lp.status == LpResult::Status::infeasible) {
            // Not enough directions yet; price on the Farkas dual and retry.
            CMatrix wf = dual_to_operator(lp.dual, dh, dk);
            pricing.seed += 1;
            std::vector<std::pair<CVector, CVector>> starts;
            atom_floor_and_starts(wf, starts);
            KStarResult ks = kstar_gauge(f, wf, pricing, starts);
            push_atom_phases(atoms, f, aligned_atom(f, wf, ks.x, ks.y));
            continue;
        }
        if (lp.status != LpResult::Status::optimal) break;

        lp_x = lp.x;
        rep.convk_upper = lp.objective;
        if (stop_at_unit_upper && rep.convk_upper <= 1.0 + tol) {
            // The explicit combination already certifies membership.
            early_inside = true;
            break;
        }

        CMatrix w = dual_to_operator(lp.dual, dh, dk);
        KStarResult ks = consider_dual(w, pricing);
        kappa_last = ks.value;
        rep.pricing_value = ks.value;

        w_avg += w;
        ++duals_seen;
        if (duals_seen > 1 && round % 2 == 1)
            consider_dual((1.0 / duals_seen) * w_avg, cheap);

        if (ks.value <= 1.0 + tol) break;
        if (rep.convk_upper - best_lower <= tol * std::max(1.0, rep.convk_upper)) break;

        std::size_t before = atoms.size();
        push_atom_phases(atoms, f, aligned_atom(f, w, ks.x, ks.y));
        for (const auto& [hx, hy] : ks.hot_pairs) {
            if (atoms.size() >= before + 12) break;
            push_atom_phases(atoms, f, aligned_atom(f, w, hx, hy));
        }
        if (atoms.size() == before) break;  // no new cut available
    }
    rep.iterations = round;

    // Final full-budget measurement of the retained dual.
    if (best_w.max_abs() > 0.0) {
        pricing.seed += 1;
        SearchConfig fin = pricing;
        fin.starts = std::max(pricing.starts, 96);
        std::vector<std::pair<CVector, CVector>> starts;
        double floor_val = atom_floor_and_starts(best_w, starts);
        KStarResult ks = kstar_gauge(f, best_w, fin, starts);
        double kappa = std::max({ks.value, floor_val, 1e-30});
        rep.dual_w = (1.0 / kappa) * best_w;
        rep.convk_lower = pairing(rep.dual_w, t);
    }
    if (rep.convk_lower > rep.convk_upper) rep.convk_lower = rep.convk_upper;
    rep.converged =
        early_inside || kappa_last <= 1.0 + tol ||
        rep.convk_upper - rep.convk_lower <= 2.0 * tol * std::max(1.0, rep.convk_upper);

    for (std::size_t j = 0; j < lp_x.size() && j < atoms.size(); ++j) {
        if (lp_x[j] > 1e-12) {
            Atom a;
            a.x = atoms[j].x;
            a.y = atoms[j].y;
            a.weight = lp_x[j];
            rep.atoms.push_back(std::move(a));
        }
    }
    return rep;
}

MembershipResult in_convk_full(const FormFamily& f, const CMatrix& t, double tol,
                               std::uint64_t seed) {
    MembershipResult res;
    double delta = delta_gauge(f, t);
    if (delta > 1.0 + tol) {
        // conv(K) is contained in Delta, so Delta-exclusion settles it.
        res.status = Membership::outside;
        res.report.delta_value = delta;
        res.report.dual_w = CMatrix::zero(f.dim_k(), f.dim_h());
        return res;
    }
    res.report = convk_gauge(f, t, tol, seed, 160, /*stop_at_unit_upper=*/true);
    if (res.report.convk_upper <= 1.0 + tol)
        res.status = Membership::inside;
    else if (res.report.convk_lower > 1.0 + tol)
        res.status = Membership::outside;
    else
        res.status = Membership::undecided;
    return res;
}

Membership in_convk(const FormFamily& f, const CMatrix& t, double tol, std::uint64_t seed) {
    return in_convk_full(f, t, tol, seed).status;
}

}  // namespace formdecomp
