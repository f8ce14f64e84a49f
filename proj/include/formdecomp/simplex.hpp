#pragma once

#include <cstddef>
#include <vector>

namespace formdecomp {

/// min c.x subject to A x = b, x >= 0 (A dense, row-major, m by n).
/// Two-phase primal simplex; returns a basic optimum and the dual vector y
/// with c_j - y.a_j >= -tol for every column at optimality.
struct LpResult {
    enum class Status { optimal, infeasible, unbounded, stalled };
    Status status = Status::stalled;
    std::vector<double> x;
    std::vector<double> dual;
    double objective = 0.0;
    int pivots = 0;
};

LpResult solve_lp(const std::vector<double>& a, std::size_t m, std::size_t n,
                  std::vector<double> b, const std::vector<double>& c);

}  // namespace formdecomp
