#pragma once

#include <cstdint>

#include "formdecomp/cmatrix.hpp"

namespace formdecomp {

/// xoshiro256++ with a splitmix64-seeded state and a hand-rolled Box-Muller.
/// Identical seed gives identical streams on every platform, which keeps
/// frozen regression values stable.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    double normal();
    Complex cnormal();

    CVector gaussian_vector(std::size_t n);
    CMatrix gaussian_matrix(std::size_t rows, std::size_t cols);

private:
    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

CMatrix random_unitary(Rng& rng, std::size_t n);
// Condition number at most cond_cap, singular values log-uniform.
CMatrix random_invertible(Rng& rng, std::size_t n, double cond_cap);
// Operator norm exactly norm_target.
CMatrix random_contraction(Rng& rng, std::size_t n, double norm_target = 1.0);
CMatrix random_psd(Rng& rng, std::size_t n);
CVector random_unit_vector(Rng& rng, std::size_t n);

}  // namespace formdecomp
