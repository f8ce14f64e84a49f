#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "formdecomp/cmatrix.hpp"
#include "formdecomp/gauges.hpp"

namespace formdecomp {

/// Witnesses V_i with |V_i| <= 1 and terms U_i = B_i^dagger V_i A_i.
/// `residual` is |sum U_i - U|_F / (1 + |U|_F).
struct Decomposition {
    std::vector<CMatrix> terms;
    std::vector<CMatrix> witnesses;
    double residual = 0.0;
    std::vector<double> per_term_norms;
    int iterations = 0;
};

/// T0 in Delta whose pairing with U exceeds 1: no decomposition can exist,
/// by the per-term trace bounds.
struct SeparationCertificate {
    CMatrix t0;
    double delta_value = 0.0;      // <= 1
    double dual_pair_value = 0.0;  // Re tr(U T0) > 1
    std::vector<Atom> generating_atoms;
};

enum class SolveStatus { feasible, undecided, certified_infeasible };

struct DecomposeResult {
    SolveStatus status = SolveStatus::undecided;
    Decomposition decomposition;
    std::optional<SeparationCertificate> certificate;
    std::vector<double> residual_trace;  // sampled once per iteration
};

/// V_i = (B_i^dagger)^{-1} U_i A_i^{-1}; the per-term bound holds iff
/// |V_i| <= 1.
CMatrix contraction_reduction(const FormFamily& f, const CMatrix& u_i, std::size_t i);

/// Dykstra-corrected alternating projections between the affine set
/// {sum B_i^dagger V_i A_i = U} and the product of operator-norm balls.
/// Iteration caps yield `undecided`; infeasibility is never declared
/// without a certificate.
DecomposeResult decompose(const FormFamily& f, const CMatrix& u, double tol = 1e-8,
                          int max_iter = 20000);

/// decompose, then an attempt to certify a stall via a separating T0.
DecomposeResult decompose_with_certification(const FormFamily& f, const CMatrix& u,
                                             double tol = 1e-8, int max_iter = 20000,
                                             std::uint64_t seed = 1);

std::vector<double> default_eps_grid();

struct EpsDecomposeStep {
    double eps = 0.0;
    SolveStatus status = SolveStatus::undecided;
    std::vector<double> per_term_norms;
    double residual = 0.0;
};

struct EpsDecomposeResult {
    DecomposeResult result;
    double eps_used = 0.0;
    std::vector<EpsDecomposeStep> trajectory;
};

/// Regularizes every pair to (A_i^dagger A_i + eps I)^{1/2} and solves down
/// the grid, returning the solution at the smallest feasible eps.
EpsDecomposeResult eps_decompose(const FormFamily& f, const CMatrix& u,
                                 std::vector<double> eps_grid = {}, double tol = 1e-8,
                                 int max_iter = 20000);

/// Concave supergradient search for T with Re tr(U T) > delta_gauge(T);
/// any such T, rescaled to the Delta sphere, certifies non-decomposability.
std::optional<SeparationCertificate> find_certificate(const FormFamily& f, const CMatrix& u,
                                                      std::uint64_t seed = 1,
                                                      double margin = 1e-9);

struct SeparatingForm {
    CMatrix u_star;
    SeparationCertificate certificate;
    GaugeReport gauge;
};

/// From T0 certified outside conv(K): the rescaled dual W satisfies the
/// majorization hypothesis yet pairs with T0 above 1.
SeparatingForm find_separating_form(const FormFamily& f, const CMatrix& t0, double tol = 1e-6,
                                    std::uint64_t seed = 1);

struct VerifyReport {
    bool ok = false;
    bool sum_ok = false;
    double sum_residual = 0.0;
    std::vector<double> slack;        // 1 - (certified or sampled) term ratio
    std::vector<double> term_ratio;   // |V_i| or worst sampled ratio
    std::vector<bool> term_ok;
    std::optional<std::pair<CVector, CVector>> violating_pair;
};

VerifyReport verify_decomposition(const FormFamily& f, const CMatrix& u,
                                  const std::vector<CMatrix>& terms, double sum_tol = 1e-10,
                                  std::uint64_t seed = 1);

}  // namespace formdecomp
