#include "formdecomp/cmatrix.hpp"

#include <cmath>
#include <cstddef>

#include "formdecomp/errors.hpp"

namespace formdecomp {

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0, 0.0)) {
    if (rows == 0 || cols == 0) throw InvalidInput("matrix dimensions must be positive");
}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw InvalidInput("matrix dimensions must be positive");
    if (data_.size() != rows * cols) throw InvalidInput("entry count does not match dimensions");
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<Complex>> init) {
    rows_ = init.size();
    if (rows_ == 0) throw InvalidInput("matrix dimensions must be positive");
    cols_ = init.begin()->size();
    if (cols_ == 0) throw InvalidInput("matrix dimensions must be positive");
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
        if (row.size() != cols_) throw InvalidInput("ragged initializer");
        for (const auto& z : row) data_.push_back(z);
    }
}

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::zero(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

CMatrix CMatrix::diag(const std::vector<double>& d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

CMatrix CMatrix::diag(const CVector& d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMatrix CMatrix::transpose() const {
    CMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMatrix CMatrix::conjugate() const {
    CMatrix r(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = std::conj(data_[k]);
    return r;
}

Complex CMatrix::trace() const {
    Complex t = 0.0;
    std::size_t n = rows_ < cols_ ? rows_ : cols_;
    for (std::size_t i = 0; i < n; ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
}

double CMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
}

bool CMatrix::is_finite() const {
    for (const auto& z : data_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

bool CMatrix::is_hermitian(double tol) const {
    if (!square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
}

CVector CMatrix::apply(const CVector& x) const {
    CVector y(rows_);
    apply_into(x, y);
    return y;
}

void CMatrix::apply_into(const CVector& x, CVector& out) const {
    if (x.size() != cols_) throw InvalidInput("apply: dimension mismatch");
    out.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        Complex acc = 0.0;
        const Complex* row = &data_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

CVector CMatrix::column(std::size_t j) const {
    CVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

void CMatrix::set_column(std::size_t j, const CVector& c) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidInput("shape mismatch in +");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidInput("shape mismatch in -");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) throw InvalidInput("shape mismatch in *");
    CMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            Complex aik = a(i, k);
            if (aik == Complex(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

CMatrix operator*(Complex s, CMatrix m) { return m *= s; }
CMatrix operator*(double s, CMatrix m) { return m *= Complex(s, 0.0); }

Complex inner(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) throw InvalidInput("inner: dimension mismatch");
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

double vnorm(const CVector& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

CVector vscale(Complex s, CVector v) {
    for (auto& z : v) z *= s;
    return v;
}

CVector vadd(CVector a, const CVector& b) {
    if (a.size() != b.size()) throw InvalidInput("vadd: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

CVector vsub(CVector a, const CVector& b) {
    if (a.size() != b.size()) throw InvalidInput("vsub: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

bool vfinite(const CVector& v) {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

CMatrix outer(const CVector& g, const CVector& h) {
    CMatrix r(g.size(), h.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < h.size(); ++j) r(i, j) = g[i] * std::conj(h[j]);
    return r;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("shape mismatch in diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

}  // namespace formdecomp
