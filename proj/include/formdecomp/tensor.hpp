#pragma once

#include <utility>
#include <vector>

#include "formdecomp/cmatrix.hpp"

namespace formdecomp {

/// Finite representation w = sum_i x_i (x) y_i of a tensor in H (x) K.
struct TensorRep {
    std::vector<std::pair<CVector, CVector>> pairs;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
    std::size_t dim_h() const { return pairs.empty() ? 0 : pairs.front().first.size(); }
    std::size_t dim_k() const { return pairs.empty() ? 0 : pairs.front().second.size(); }

    void validate() const;  // equal dimensions per side, finite entries
};

/// Matrix of the induced map: sum_i y_i x_i^T (dim_k by dim_h); its argument
/// is the conjugated coordinate vector of H.
CMatrix induced_matrix(const TensorRep& w);

/// Projective norm, equal to the trace norm of the induced map.
double pi_norm(const TensorRep& w);

/// Orthogonal representation (xi_i, eta_i) with |xi_i|^2 = |eta_i|^2 = s_i,
/// one pair per nonzero singular value of the induced map.
TensorRep canonical_rep(const TensorRep& w);

/// (C (x) D) w: applies C to every x_i and D to every y_i.
TensorRep apply_pair(const CMatrix& c, const CMatrix& d, const TensorRep& w);

struct AlphaBeta {
    CMatrix alpha;  // C xi_i = sum_j alpha_ij rho_j
    CMatrix beta;   // D eta_i = sum_j beta_ij sigma_j; beta = (alpha^t)^{-1}
    TensorRep rho_sigma;
};

AlphaBeta alpha_beta(const TensorRep& w_canon, const CMatrix& c, const CMatrix& d);

/// Joint diagonalization data: C xi_hat_i = d_i rho_hat_i and
/// D eta_hat_i = d_i^{-1} sigma_hat_i, with sum_i xi_hat_i (x) eta_hat_i = w.
struct HatSystem {
    std::vector<CVector> xi_hat, eta_hat, rho_hat, sigma_hat;
    std::vector<double> d;
    CMatrix u_mat, v_mat;  // alpha = u_mat * diag(d) * v_mat, both unitary
    bool degenerate = false;
    double min_gap = 0.0;
};

HatSystem hat_construction(const TensorRep& w_canon, const CMatrix& c, const CMatrix& d);

struct TwoTermBound {
    double lhs;  // |sum_i <U x_i | y_i>|
    double rhs;  // pi(w) + pi((C (x) D) w)
};

TwoTermBound two_term_estimate(const CMatrix& u, const TensorRep& w, const CMatrix& c,
                               const CMatrix& d);

/// Tests whether the two diagonalizing left unitaries coincide entrywise.
struct CompatReport {
    bool compatible = false;
    bool degenerate = false;  // close singular values make the comparison unreliable
    CMatrix u_first, u_second;
    std::vector<double> d_first, d_second;
    double max_entry_diff = 0.0;
};

CompatReport three_term_compat(const TensorRep& w_canon, const CMatrix& c, const CMatrix& d,
                               const CMatrix& e, const CMatrix& f);

}  // namespace formdecomp
