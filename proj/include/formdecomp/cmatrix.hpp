#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace formdecomp {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Dense complex matrix, row-major storage.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols);
    CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
    CMatrix(std::initializer_list<std::initializer_list<Complex>> init);

    static CMatrix identity(std::size_t n);
    static CMatrix zero(std::size_t rows, std::size_t cols);
    static CMatrix diag(const std::vector<double>& d);
    static CMatrix diag(const CVector& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<Complex>& data() const { return data_; }
    std::vector<Complex>& data() { return data_; }

    CMatrix adjoint() const;
    CMatrix transpose() const;
    CMatrix conjugate() const;

    Complex trace() const;
    double frobenius_norm() const;
    double max_abs() const;
    bool is_finite() const;
    bool is_hermitian(double tol) const;

    CVector apply(const CVector& x) const;
    void apply_into(const CVector& x, CVector& out) const;  // out may not alias x
    CVector column(std::size_t j) const;
    void set_column(std::size_t j, const CVector& c);

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(Complex s);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Complex> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(Complex s, CMatrix m);
CMatrix operator*(double s, CMatrix m);

// <a|b>, linear in a and conjugate-linear in b.
Complex inner(const CVector& a, const CVector& b);
double vnorm(const CVector& v);
CVector vscale(Complex s, CVector v);
CVector vadd(CVector a, const CVector& b);
CVector vsub(CVector a, const CVector& b);
bool vfinite(const CVector& v);

// Rank-one operator g (x) h acting as f -> <f|h> g; materializes as g * h^dagger.
CMatrix outer(const CVector& g, const CVector& h);

double max_abs_diff(const CMatrix& a, const CMatrix& b);

}  // namespace formdecomp
