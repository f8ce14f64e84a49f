#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "formdecomp/cmatrix.hpp"

namespace formdecomp {

struct FormPair {
    CMatrix a;  // acts on H
    CMatrix b;  // acts on K
    double cond_a = 0.0;
    double cond_b = 0.0;
    bool invertible = false;  // both condition numbers at most 1e8
};

/// Ordered family (A_i, B_i) defining the majorant sum_i |A_i x| |B_i y|.
class FormFamily {
public:
    static FormFamily make(std::vector<std::pair<CMatrix, CMatrix>> pairs);

    const std::vector<FormPair>& pairs() const { return pairs_; }
    const FormPair& pair(std::size_t i) const { return pairs_[i]; }
    std::size_t size() const { return pairs_.size(); }
    std::size_t dim_h() const { return dim_h_; }
    std::size_t dim_k() const { return dim_k_; }
    bool all_invertible() const;

private:
    std::vector<FormPair> pairs_;
    std::size_t dim_h_ = 0, dim_k_ = 0;
};

double majorant(const FormFamily& f, const CVector& x, const CVector& y);

/// sum_i |A_i T B_i^dagger|_1; T belongs to Delta iff the value is <= 1.
double delta_gauge(const FormFamily& f, const CMatrix& t);

struct SearchConfig {
    int starts = 64;       // Gaussian multistarts
    int max_iter = 400;    // ascent iterations per start
    std::uint64_t seed = 1;
};

/// Best found value of sup |<Ux|y>| / majorant(x,y); a lower bound on the
/// true supremum, with the attaining pair and convergence diagnostics.
struct KStarResult {
    double value = 0.0;
    CVector x, y;
    bool converged = false;
    int iterations = 0;
    int starts_near_best = 0;
    // Distinct local maxima with ratio above one, best first; used by the
    // column generation as cutting planes.
    std::vector<std::pair<CVector, CVector>> hot_pairs;
};

KStarResult kstar_gauge(const FormFamily& f, const CMatrix& u, const SearchConfig& cfg = {},
                        const std::vector<std::pair<CVector, CVector>>& extra_starts = {});

struct Atom {
    CVector x, y;       // majorant(x, y) = 1
    double weight = 0.0;
};

struct GaugeReport {
    double delta_value = 0.0;
    double convk_lower = 0.0;
    double convk_upper = 0.0;
    std::vector<Atom> atoms;
    CMatrix dual_w;           // rescaled so its K*-gauge is (numerically) at most 1
    int iterations = 0;
    bool converged = false;
    double pricing_value = 0.0;  // K*-gauge of the final unscaled dual
};

/// Column generation for the Minkowski gauge of conv(K). convk_upper comes
/// from the explicit convex combination, convk_lower from the rescaled dual.
/// With stop_at_unit_upper the run ends as soon as the upper bound drops to
/// 1 + tol; the combination alone certifies membership and the restricted
/// optimum never undershoots the true gauge.
GaugeReport convk_gauge(const FormFamily& f, const CMatrix& t, double tol = 1e-6,
                        std::uint64_t seed = 1, int max_rounds = 160,
                        bool stop_at_unit_upper = false);

enum class Membership { inside, outside, undecided };

struct MembershipResult {
    Membership status = Membership::undecided;
    GaugeReport report;
};

MembershipResult in_convk_full(const FormFamily& f, const CMatrix& t, double tol = 1e-6,
                               std::uint64_t seed = 1);
Membership in_convk(const FormFamily& f, const CMatrix& t, double tol = 1e-6,
                    std::uint64_t seed = 1);

// Re tr(w t): the duality pairing between an operator and a trace-class
// direction; tr(w * outer(x, y)) = <w x | y>.
double pairing(const CMatrix& w, const CMatrix& t);

}  // namespace formdecomp
