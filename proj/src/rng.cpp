#include "formdecomp/rng.hpp"

#include <cmath>

#include "formdecomp/errors.hpp"
#include "formdecomp/linalg.hpp"

namespace formdecomp {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

Complex Rng::cnormal() {
    double re = normal(), im = normal();
    return Complex(re * 0.7071067811865476, im * 0.7071067811865476);
}

CVector Rng::gaussian_vector(std::size_t n) {
    CVector v(n);
    for (auto& z : v) z = cnormal();
    return v;
}

CMatrix Rng::gaussian_matrix(std::size_t rows, std::size_t cols) {
    CMatrix m(rows, cols);
    for (auto& z : m.data()) z = cnormal();
    return m;
}

CMatrix random_unitary(Rng& rng, std::size_t n) {
    // Gram-Schmidt on a Gaussian matrix; the positive-diagonal normalization
    // makes the distribution Haar up to the usual QR phase fix.
    CMatrix g = rng.gaussian_matrix(n, n);
    CMatrix q(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        CVector col = g.column(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                CVector prev = q.column(k);
                Complex proj = inner(col, prev);
                col = vsub(col, vscale(proj, prev));
            }
        }
        double nc = vnorm(col);
        if (nc < 1e-12) {
            // Degenerate draw; fall back to a coordinate direction.
            col.assign(n, Complex(0.0, 0.0));
            col[j] = 1.0;
        } else {
            col = vscale(1.0 / nc, col);
        }
        q.set_column(j, col);
    }
    return q;
}

CMatrix random_invertible(Rng& rng, std::size_t n, double cond_cap) {
    if (cond_cap < 1.0) throw InvalidInput("random_invertible: cond_cap must be >= 1");
    CMatrix u = random_unitary(rng, n);
    CMatrix v = random_unitary(rng, n);
    double half = 0.5 * std::log(cond_cap);
    std::vector<double> s(n);
    for (auto& x : s) x = std::exp(rng.uniform(-half, half));
    return u * CMatrix::diag(s) * v;
}

CMatrix random_contraction(Rng& rng, std::size_t n, double norm_target) {
    CMatrix g = rng.gaussian_matrix(n, n);
    double nrm = operator_norm(g);
    if (nrm < 1e-12) return CMatrix::zero(n, n);
    return (norm_target / nrm) * g;
}

CMatrix random_psd(Rng& rng, std::size_t n) {
    CMatrix g = rng.gaussian_matrix(n, n);
    return g * g.adjoint();
}

CVector random_unit_vector(Rng& rng, std::size_t n) {
    CVector v = rng.gaussian_vector(n);
    double nv = vnorm(v);
    while (nv < 1e-12) {
        v = rng.gaussian_vector(n);
        nv = vnorm(v);
    }
    return vscale(1.0 / nv, v);
}

}  // namespace formdecomp
