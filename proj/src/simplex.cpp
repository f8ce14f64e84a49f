#include "formdecomp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "formdecomp/errors.hpp"

namespace formdecomp {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;

struct RealLu {
    std::vector<double> lu;  // n x n row-major
    std::vector<std::size_t> perm;
    std::size_t n = 0;
    bool singular = false;
};

RealLu factor(const std::vector<double>& a, std::size_t n) {
    RealLu f;
    f.lu = a;
    f.n = n;
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f.lu[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(f.lu[i * n + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < 1e-13) {
            f.singular = true;
            return f;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu[k * n + j], f.lu[piv * n + j]);
            std::swap(f.perm[k], f.perm[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double m = f.lu[i * n + k] / f.lu[k * n + k];
            f.lu[i * n + k] = m;
            for (std::size_t j = k + 1; j < n; ++j) f.lu[i * n + j] -= m * f.lu[k * n + j];
        }
    }
    return f;
}

std::vector<double> lu_solve(const RealLu& f, const std::vector<double>& rhs) {
    const std::size_t n = f.n;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu[i * n + j] * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu[i * n + j] * x[j];
        x[i] /= f.lu[i * n + i];
    }
    return x;
}

// Solves A^T y = rhs given the factorization of A: A = P^T L U, so
// A^T = U^T L^T P and y = P^T (L^T)^{-1} (U^T)^{-1} rhs.
std::vector<double> lu_solve_transposed(const RealLu& f, const std::vector<double>& rhs) {
    const std::size_t n = f.n;
    std::vector<double> z = rhs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) z[i] -= f.lu[j * n + i] * z[j];
        z[i] /= f.lu[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = i + 1; j < n; ++j) z[i] -= f.lu[j * n + i] * z[j];
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[f.perm[i]] = z[i];
    return y;
}

struct Tableau {
    const std::vector<double>* cols;  // column-major: col j at [j*m .. j*m+m)
    std::size_t m, total;
    std::vector<double> b;
    std::vector<double> cost;
    std::vector<std::size_t> basis;
    std::vector<bool> blocked;  // columns never allowed to enter

    const double* col(std::size_t j) const { return cols->data() + j * m; }
};

// Runs the simplex method on an initial feasible basis. Returns false on
// unboundedness. Dantzig pricing with a Bland fallback after long
// degenerate runs keeps it both fast and cycle-free.
bool run_simplex(Tableau& t, std::vector<double>& xb, std::vector<double>& y, int& pivots,
                 int max_pivots, bool& stalled) {
    const std::size_t m = t.m;
    int degenerate_run = 0;
    stalled = false;

    while (true) {
        if (pivots >= max_pivots) {
            stalled = true;
            return true;
        }
        std::vector<double> bmat(m * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < m; ++r) bmat[r * m + i] = t.col(t.basis[i])[r];
        RealLu f = factor(bmat, m);
        if (f.singular) {
            stalled = true;
            return true;
        }
        xb = lu_solve(f, t.b);
        std::vector<double> cb(m);
        for (std::size_t i = 0; i < m; ++i) cb[i] = t.cost[t.basis[i]];
        y = lu_solve_transposed(f, cb);

        bool bland = degenerate_run > 64;
        std::size_t entering = t.total;
        double best = -kReducedCostTol;
        for (std::size_t j = 0; j < t.total; ++j) {
            if (t.blocked[j]) continue;
            bool basic = false;
            for (std::size_t i = 0; i < m; ++i)
                if (t.basis[i] == j) {
                    basic = true;
                    break;
                }
            if (basic) continue;
            const double* aj = t.col(j);
            double r = t.cost[j];
            for (std::size_t i = 0; i < m; ++i) r -= y[i] * aj[i];
            if (bland) {
                if (r < -kReducedCostTol) {
                    entering = j;
                    break;
                }
            } else if (r < best) {
                best = r;
                entering = j;
            }
        }
        if (entering == t.total) return true;  // optimal

        std::vector<double> rhs(t.col(entering), t.col(entering) + m);
        std::vector<double> dir = lu_solve(f, rhs);

        double theta = 0.0;
        std::size_t leaving = m;
        for (std::size_t i = 0; i < m; ++i) {
            if (dir[i] > kPivotTol) {
                double ratio = std::max(0.0, xb[i]) / dir[i];
                if (leaving == m || ratio < theta - 1e-13 ||
                    (ratio < theta + 1e-13 && t.basis[i] < t.basis[leaving])) {
                    theta = ratio;
                    leaving = i;
                }
            }
        }
        if (leaving == m) return false;  // unbounded

        degenerate_run = (theta < 1e-13) ? degenerate_run + 1 : 0;
        t.basis[leaving] = entering;
        ++pivots;
    }
}

}  // namespace

LpResult solve_lp(const std::vector<double>& a, std::size_t m, std::size_t n,
                  std::vector<double> b, const std::vector<double>& c) {
    if (a.size() != m * n || b.size() != m || c.size() != n)
        throw InvalidInput("solve_lp: inconsistent sizes");

    // Column-major copy with b >= 0 and m artificial columns appended.
    const std::size_t total = n + m;
    std::vector<double> cols(total * m, 0.0);
    std::vector<double> sign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i)
        if (b[i] < 0.0) {
            sign[i] = -1.0;
            b[i] = -b[i];
        }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) cols[j * m + i] = sign[i] * a[i * n + j];
    for (std::size_t i = 0; i < m; ++i) cols[(n + i) * m + i] = 1.0;

    Tableau t;
    t.cols = &cols;
    t.m = m;
    t.total = total;
    t.b = b;
    t.blocked.assign(total, false);
    t.basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) t.basis[i] = n + i;

    LpResult res;
    const int max_pivots = 4000 + 60 * static_cast<int>(m + n);

    // Phase 1: minimize the artificial mass.
    t.cost.assign(total, 0.0);
    for (std::size_t i = 0; i < m; ++i) t.cost[n + i] = 1.0;
    std::vector<double> xb, y;
    bool stalled = false;
    if (!run_simplex(t, xb, y, res.pivots, max_pivots, stalled) || stalled) {
        res.status = LpResult::Status::stalled;
        return res;
    }
    double bscale = 0.0;
    for (double v : t.b) bscale += std::abs(v);
    double phase1 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] >= n) phase1 += xb[i];
    if (phase1 > 1e-9 * (1.0 + bscale)) {
        res.status = LpResult::Status::infeasible;
        res.dual.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) res.dual[i] = sign[i] * y[i];
        res.objective = phase1;
        return res;
    }

    // Drive remaining zero-level artificials out where a real pivot exists.
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < n) continue;
        std::vector<double> bmat(m * m);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t r = 0; r < m; ++r) bmat[r * m + k] = t.col(t.basis[k])[r];
        RealLu f = factor(bmat, m);
        if (f.singular) break;
        for (std::size_t j = 0; j < n; ++j) {
            bool basic = false;
            for (std::size_t k = 0; k < m; ++k)
                if (t.basis[k] == j) {
                    basic = true;
                    break;
                }
            if (basic) continue;
            std::vector<double> rhs(t.col(j), t.col(j) + m);
            std::vector<double> dir = lu_solve(f, rhs);
            if (std::abs(dir[i]) > 1e-7) {
                t.basis[i] = j;
                break;
            }
        }
    }

    // Phase 2 on the real objective; artificials may not re-enter.
    t.cost.assign(total, 0.0);
    for (std::size_t j = 0; j < n; ++j) t.cost[j] = c[j];
    for (std::size_t j = n; j < total; ++j) t.blocked[j] = true;
    if (!run_simplex(t, xb, y, res.pivots, max_pivots, stalled)) {
        res.status = LpResult::Status::unbounded;
        return res;
    }
    if (stalled) {
        res.status = LpResult::Status::stalled;
        return res;
    }

    res.status = LpResult::Status::optimal;
    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] < n) res.x[t.basis[i]] = std::max(0.0, xb[i]);
    res.dual.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) res.dual[i] = sign[i] * y[i];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
    return res;
}

}  // namespace formdecomp
