#include "formdecomp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "formdecomp/errors.hpp"

namespace formdecomp {

namespace {

constexpr int kMaxSweeps = 64;
constexpr double kJacobiEps = 1e-15;

// Small-magnitude root of t^2 - 2*tau*t - 1 = 0; either root zeroes the
// pivot, the small one keeps the rotation close to identity.
double jacobi_tangent(double tau) {
    if (tau == 0.0) return 1.0;
    double r = std::abs(tau) + std::sqrt(1.0 + tau * tau);
    return (tau > 0.0) ? 1.0 / r : -1.0 / r;
}

// One-sided Jacobi on the columns of b (rows >= cols assumed), accumulating
// the right factor into v so that b_in = b_out * v^dagger throughout.
void orthogonalize_columns(CMatrix& b, CMatrix& v) {
    const std::size_t n = b.cols();
    const std::size_t m = b.rows();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0;
                Complex apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    app += std::norm(b(i, p));
                    aqq += std::norm(b(i, q));
                    apq += std::conj(b(i, p)) * b(i, q);
                }
                double mag = std::abs(apq);
                if (mag <= kJacobiEps * std::sqrt(app * aqq)) continue;
                rotated = true;

                Complex phase = apq / mag;
                double tau = (aqq - app) / (2.0 * mag);
                double t = jacobi_tangent(tau);
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;

                // Columns [p q] <- [p q] * [[c, s*phase], [-s*conj(phase), c]].
                Complex sp = s * phase;
                Complex spc = s * std::conj(phase);
                for (std::size_t i = 0; i < m; ++i) {
                    Complex bp = b(i, p), bq = b(i, q);
                    b(i, p) = c * bp - spc * bq;
                    b(i, q) = sp * bp + c * bq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    Complex vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - spc * vq;
                    v(i, q) = sp * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

// Extend the first `have` orthonormal columns of q to a full basis, picking
// coordinate candidates greedily by residual size.
void complete_basis(CMatrix& q, std::size_t have) {
    const std::size_t n = q.rows();
    for (std::size_t j = have; j < q.cols(); ++j) {
        CVector best;
        double best_norm = -1.0;
        for (std::size_t cand = 0; cand < n; ++cand) {
            CVector r(n, Complex(0.0, 0.0));
            r[cand] = 1.0;
            for (std::size_t k = 0; k < j; ++k) {
                Complex proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += std::conj(q(i, k)) * r[i];
                for (std::size_t i = 0; i < n; ++i) r[i] -= proj * q(i, k);
            }
            double nr = vnorm(r);
            if (nr > best_norm) {
                best_norm = nr;
                best = r;
            }
        }
        // Re-orthogonalize once for safety, then normalize.
        for (std::size_t k = 0; k < j; ++k) {
            Complex proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += std::conj(q(i, k)) * best[i];
            for (std::size_t i = 0; i < n; ++i) best[i] -= proj * q(i, k);
        }
        double nb = vnorm(best);
        for (std::size_t i = 0; i < n; ++i) q(i, j) = best[i] / nb;
    }
}

// Rotate column j of u so its first nonzero entry is real positive; the
// matching column of v absorbs the conjugate phase when paired != nullptr.
void fix_column_phase(CMatrix& u, CMatrix* paired, std::size_t j) {
    for (std::size_t i = 0; i < u.rows(); ++i) {
        double a = std::abs(u(i, j));
        if (a > 1e-12) {
            Complex ph = std::conj(u(i, j)) / a;
            for (std::size_t k = 0; k < u.rows(); ++k) u(k, j) *= ph;
            if (paired)
                for (std::size_t k = 0; k < paired->rows(); ++k) (*paired)(k, j) *= ph;
            return;
        }
    }
}

SVDResult svd_tall(const CMatrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    CMatrix b = m;
    CMatrix v = CMatrix::identity(cols);
    orthogonalize_columns(b, v);

    std::vector<double> norms(cols);
    for (std::size_t j = 0; j < cols; ++j) norms[j] = vnorm(b.column(j));
    double smax = *std::max_element(norms.begin(), norms.end());

    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return norms[a] > norms[c]; });

    CMatrix u(rows, rows);
    CMatrix vperm(cols, cols);
    std::vector<double> s(cols);
    std::size_t nonzero = 0;
    const double cutoff = smax * 1e-15;
    for (std::size_t j = 0; j < cols; ++j) {
        std::size_t src = order[j];
        s[j] = norms[src];
        vperm.set_column(j, v.column(src));
        if (s[j] > cutoff && s[j] > 0.0) {
            CVector col = b.column(src);
            for (std::size_t i = 0; i < rows; ++i) u(i, j) = col[i] / s[j];
            nonzero = j + 1;
        } else {
            s[j] = norms[src];  // keep the tiny value, basis column comes from completion
        }
    }
    complete_basis(u, nonzero);
    return SVDResult{std::move(u), std::move(s), std::move(vperm)};
}

void check_square(const CMatrix& m, const char* who) {
    if (!m.square()) throw InvalidInput(std::string(who) + ": matrix must be square");
}

}  // namespace

SVDResult svd(const CMatrix& m) {
    if (!m.is_finite()) throw InvalidInput("svd: non-finite input");
    SVDResult r;
    if (m.rows() >= m.cols()) {
        r = svd_tall(m);
    } else {
        SVDResult t = svd_tall(m.adjoint());
        r.u = std::move(t.v);
        r.v = std::move(t.u);
        r.s = std::move(t.s);
    }
    const std::size_t k = std::min(m.rows(), m.cols());
    for (std::size_t j = 0; j < r.u.cols(); ++j)
        fix_column_phase(r.u, j < k ? &r.v : nullptr, j);
    for (std::size_t j = k; j < r.v.cols(); ++j) fix_column_phase(r.v, nullptr, j);
    return r;
}

EigResult hermitian_eig(const CMatrix& m) {
    check_square(m, "hermitian_eig");
    if (!m.is_finite()) throw InvalidInput("hermitian_eig: non-finite input");
    const double scale = std::max(1.0, m.max_abs());
    if (!m.is_hermitian(1e-12 * scale))
        throw InvalidInput("hermitian_eig: matrix is not Hermitian within tolerance");

    const std::size_t n = m.rows();
    CMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    CMatrix q = CMatrix::identity(n);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t qq = p + 1; qq < n; ++qq) {
                Complex hpq = h(p, qq);
                double mag = std::abs(hpq);
                double a = h(p, p).real(), bb = h(qq, qq).real();
                if (mag <= kJacobiEps * (std::abs(a) + std::abs(bb)) || mag == 0.0) continue;
                rotated = true;

                Complex phase = hpq / mag;
                double tau = (bb - a) / (2.0 * mag);
                double t = jacobi_tangent(tau);
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                Complex sp = s * phase;
                Complex spc = s * std::conj(phase);

                // H <- G^dagger H G with G = [[c, s*phase], [-s*conj(phase), c]]
                // in the (p,q) plane; columns first, then rows.
                for (std::size_t i = 0; i < n; ++i) {
                    Complex xp = h(i, p), xq = h(i, qq);
                    h(i, p) = c * xp - spc * xq;
                    h(i, qq) = sp * xp + c * xq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    Complex xp = h(p, i), xq = h(qq, i);
                    h(p, i) = c * xp - sp * xq;
                    h(qq, i) = spc * xp + c * xq;
                }
                h(p, qq) = 0.0;
                h(qq, p) = 0.0;
                h(p, p) = Complex(h(p, p).real(), 0.0);
                h(qq, qq) = Complex(h(qq, qq).real(), 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    Complex xp = q(i, p), xq = q(i, qq);
                    q(i, p) = c * xp - spc * xq;
                    q(i, qq) = sp * xp + c * xq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = h(i, i).real();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return vals[a] > vals[c]; });

    EigResult r;
    r.values.resize(n);
    r.vectors = CMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        r.values[j] = vals[order[j]];
        r.vectors.set_column(j, q.column(order[j]));
        fix_column_phase(r.vectors, nullptr, j);
    }
    return r;
}

PolarResult polar(const CMatrix& m) {
    check_square(m, "polar");
    if (!m.is_finite()) throw InvalidInput("polar: non-finite input");
    SVDResult d = svd(m);
    CMatrix u = d.u * d.v.adjoint();
    CMatrix abs_m = d.v * CMatrix::diag(d.s) * d.v.adjoint();
    return PolarResult{std::move(u), std::move(abs_m)};
}

double trace_norm(const CMatrix& m) {
    if (!m.is_finite()) throw InvalidInput("trace_norm: non-finite input");
    SVDResult d = svd(m);
    double t = 0.0;
    for (double x : d.s) t += x;
    return t;
}

double operator_norm(const CMatrix& m) {
    if (!m.is_finite()) throw InvalidInput("operator_norm: non-finite input");
    SVDResult d = svd(m);
    return d.s.empty() ? 0.0 : d.s.front();
}

CMatrix sqrt_psd(const CMatrix& m) {
    EigResult e = hermitian_eig(m);
    const double scale = std::max(1.0, m.max_abs());
    std::vector<double> roots(e.values.size());
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        if (e.values[i] < -1e-12 * scale)
            throw InvalidInput("sqrt_psd: matrix has a negative eigenvalue");
        roots[i] = std::sqrt(std::max(0.0, e.values[i]));
    }
    return e.vectors * CMatrix::diag(roots) * e.vectors.adjoint();
}

CMatrix eps_regularize(const CMatrix& m, double eps) {
    check_square(m, "eps_regularize");
    if (!(eps > 0.0)) throw InvalidInput("eps_regularize: eps must be strictly positive");
    CMatrix g = m.adjoint() * m;
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += eps;
    return sqrt_psd(g);
}

namespace {

// LU with partial pivoting; a is overwritten, perm records row swaps.
void lu_factor(CMatrix& a, std::vector<std::size_t>& perm) {
    const std::size_t n = a.rows();
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) throw IllConditioned("solve: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            Complex f = a(i, k) / a(k, k);
            a(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
}

void lu_solve_inplace(const CMatrix& lu, const std::vector<std::size_t>& perm, CVector& x) {
    const std::size_t n = lu.rows();
    CVector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = x[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) b[i] -= lu(i, j) * b[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) b[i] -= lu(i, j) * b[j];
        b[i] /= lu(i, i);
    }
    x = std::move(b);
}

}  // namespace

CMatrix solve(const CMatrix& a, const CMatrix& b) {
    check_square(a, "solve");
    if (a.rows() != b.rows()) throw InvalidInput("solve: shape mismatch");
    CMatrix lu = a;
    std::vector<std::size_t> perm;
    lu_factor(lu, perm);
    CMatrix x(b.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        CVector col = b.column(j);
        lu_solve_inplace(lu, perm, col);
        x.set_column(j, col);
    }
    return x;
}

CVector solve(const CMatrix& a, const CVector& b) {
    check_square(a, "solve");
    if (a.rows() != b.size()) throw InvalidInput("solve: shape mismatch");
    CMatrix lu = a;
    std::vector<std::size_t> perm;
    lu_factor(lu, perm);
    CVector x = b;
    lu_solve_inplace(lu, perm, x);
    return x;
}

CMatrix inverse(const CMatrix& m) { return solve(m, CMatrix::identity(m.rows())); }

double cond_2(const CMatrix& m) {
    SVDResult d = svd(m);
    double lo = d.s.back();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return d.s.front() / lo;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            Complex aij = a(i, j);
            if (aij == Complex(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

CVector vec_cols(const CMatrix& m) {
    CVector v(m.rows() * m.cols());
    std::size_t idx = 0;
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) v[idx++] = m(i, j);
    return v;
}

CMatrix unvec_cols(const CVector& v, std::size_t rows, std::size_t cols) {
    if (v.size() != rows * cols) throw InvalidInput("unvec: size mismatch");
    CMatrix m(rows, cols);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[idx++];
    return m;
}

}  // namespace formdecomp
