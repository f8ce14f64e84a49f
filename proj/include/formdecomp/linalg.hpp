#pragma once

#include <vector>

#include "formdecomp/cmatrix.hpp"

namespace formdecomp {

// Algebraic identity tolerance (relative) and derived-quantity tolerance.
inline constexpr double kAlgTol = 1e-12;
inline constexpr double kDerivedTol = 1e-10;
// Condition-number threshold beyond which an operator counts as non-invertible.
inline constexpr double kCondMax = 1e8;

/// m = u * diag(s) * v^dagger with u, v unitary and s nonincreasing.
///
/// Deterministic output: singular values sorted descending with stable tie
/// order, and the first nonzero component of every left singular vector is
/// rotated to be real positive (right vectors adjusted to compensate).
struct SVDResult {
    CMatrix u;
    std::vector<double> s;
    CMatrix v;
};

SVDResult svd(const CMatrix& m);

/// m = vectors * diag(values) * vectors^dagger, eigenvalues descending.
struct EigResult {
    std::vector<double> values;
    CMatrix vectors;
};

EigResult hermitian_eig(const CMatrix& m);

/// m = isometry * absolute, absolute positive semidefinite.
struct PolarResult {
    CMatrix isometry;
    CMatrix absolute;
};

PolarResult polar(const CMatrix& m);

double trace_norm(const CMatrix& m);
double operator_norm(const CMatrix& m);

/// Positive square root of a positive semidefinite matrix.
CMatrix sqrt_psd(const CMatrix& m);

/// (m^dagger m + eps I)^{1/2}; Hermitian positive definite, dominates |m|.
CMatrix eps_regularize(const CMatrix& m, double eps);

CMatrix inverse(const CMatrix& m);
CMatrix solve(const CMatrix& a, const CMatrix& b);
CVector solve(const CMatrix& a, const CVector& b);
double cond_2(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CVector vec_cols(const CMatrix& m);
CMatrix unvec_cols(const CVector& v, std::size_t rows, std::size_t cols);

}  // namespace formdecomp
