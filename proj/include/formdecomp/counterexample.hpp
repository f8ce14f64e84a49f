#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "formdecomp/cmatrix.hpp"
#include "formdecomp/decompose.hpp"
#include "formdecomp/gauges.hpp"

namespace formdecomp {

/// The two-dimensional instance: positive non-commuting A and C with no
/// common eigenvector, U = I + A + C, and T0 = c I on the Delta sphere.
struct CounterexampleInstance {
    CMatrix A;
    CMatrix C;
    CMatrix U;
    double c = 0.0;
    CMatrix T0;

    FormFamily family() const;  // {(I, I), (A, I), (C, I)}
};

CounterexampleInstance build_instance();
/// Same validation on caller-supplied matrices; c defaults to the inverse
/// trace-norm sum when not positive.
CounterexampleInstance build_instance(const CMatrix& a, const CMatrix& c_mat, const CMatrix& u,
                                      double c_scale = 0.0);

struct StageResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

struct CounterexampleReport {
    std::vector<StageResult> stages;
    bool all_pass = false;
    double n1 = 0.0, n2 = 0.0, n3 = 0.0;
    double delta_value = 0.0;
    double kstar_value = 0.0;
    double convk_lower = 0.0, convk_upper = 0.0;
    double separation_value = 0.0;
    double decompose_residual = 0.0;
    std::optional<SeparatingForm> separated;
};

/// Runs the full pipeline: exact gauge values, majorization of U,
/// non-membership of T0, the executable separated form, and the
/// decomposability of the displayed U.
CounterexampleReport verify_all(const CounterexampleInstance& inst, std::uint64_t seed = 1);

struct TraceEqualityReport {
    bool equality_holds = false;
    double gap = 0.0;  // sum |x_j||y_j| - |S|_1, nonnegative
    bool proportional = false;
    std::vector<double> alphas;  // y_j = alpha_j x_j where applicable
};

/// Checks the trace-norm equality |S|_1 = sum |x_j||y_j| and, when it
/// holds, whether every y_j is a positive multiple of x_j.
TraceEqualityReport trace_equality_check(const CMatrix& s,
                            const std::vector<std::pair<CVector, CVector>>& rep);

/// A unit vector that is an eigenvector of both (Hermitian) matrices, if
/// one exists; degenerate eigenspaces of m1 are searched by restricting m2.
std::optional<CVector> common_eigenvector(const CMatrix& m1, const CMatrix& m2,
                                          double tol = 1e-9);

}  // namespace formdecomp
