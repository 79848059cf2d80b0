#include "stgc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "stgc/errors.hpp"
#include "stgc/kernels.hpp"

namespace stgc {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "matrix +=");
  kernels::active().axpy(data_.size(), 1.0, other.data(), data_.data());
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "matrix -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void gemm(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, double alpha,
          double beta, Matrix& c) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (k != kb) throw DimensionError("gemm: inner dimensions differ");
  if (c.rows() != m || c.cols() != n) throw DimensionError("gemm: output has wrong shape");
  if (m == 0 || n == 0) return;
  if (k == 0) {
    c *= beta;
    return;
  }
  kernels::active().gemm(trans_a, trans_b, m, n, k, alpha, a.data(), a.cols(), b.data(),
                         b.cols(), beta, c.data(), c.cols());
}

Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
  Matrix c(trans_a ? a.cols() : a.rows(), trans_b ? b.rows() : b.cols());
  gemm(a, trans_a, b, trans_b, 1.0, 0.0, c);
  return c;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t s = 0; s < b.cols(); ++s)
          k(i * b.rows() + r, j * b.cols() + s) = aij * b(r, s);
    }
  return k;
}

Matrix vec(const Matrix& a) {
  Matrix v(a.rows() * a.cols(), 1);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) v(j * a.rows() + i, 0) = a(i, j);
  return v;
}

Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: length does not match shape");
  Matrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a(i, j) = v.data()[j * rows + i];
  return a;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double inf_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

double spectral_norm(const Matrix& a, double tol, int max_iter) {
  if (a.empty()) return 0.0;
  const double scale = max_abs(a);
  if (scale == 0.0) return 0.0;

  // Fixed pseudo-random start so repeated calls agree bit for bit.
  Matrix v(a.cols(), 1);
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (double& x : v.values()) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    x = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  v *= 1.0 / frobenius_norm(v);

  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Matrix av = matmul(a, v);
    Matrix w = matmul(a, av, true, false);
    const double nw = frobenius_norm(w);
    if (nw == 0.0) return 0.0;
    const double next = std::sqrt(nw);
    w *= 1.0 / nw;
    v = std::move(w);
    if (std::abs(next - sigma) <= tol * next) return next;
    sigma = next;
  }
  return sigma;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("solve: matrix is not square");
  if (b.rows() != n) throw DimensionError("solve: right-hand side has wrong row count");
  Matrix lu = a;
  Matrix x = b;
  const std::size_t nrhs = b.cols();
  const double scale = std::max(1.0, max_abs(a));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(lu(r, col)) > std::abs(lu(piv, col))) piv = r;
    if (std::abs(lu(piv, col)) <= 1e-300 * scale)
      throw PreconditionError("solve: matrix is singular");
    if (piv != col) {
      std::swap_ranges(lu.row(col).begin(), lu.row(col).end(), lu.row(piv).begin());
      std::swap_ranges(x.row(col).begin(), x.row(col).end(), x.row(piv).begin());
    }
    const double d = lu(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = lu(r, col) / d;
      if (f == 0.0) continue;
      lu(r, col) = f;
      for (std::size_t c = col + 1; c < n; ++c) lu(r, c) -= f * lu(col, c);
      for (std::size_t c = 0; c < nrhs; ++c) x(r, c) -= f * x(col, c);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t c = 0; c < nrhs; ++c) {
      double s = x(col, c);
      for (std::size_t k = col + 1; k < n; ++k) s -= lu(col, k) * x(k, c);
      x(col, c) = s / lu(col, col);
    }
  }
  return x;
}

}  // namespace stgc
