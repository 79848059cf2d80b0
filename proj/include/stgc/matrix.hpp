#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace stgc {

/// Dense row-major matrix of doubles. Sizes in this library stay small
/// (skeleton graphs have at most a few dozen nodes), so storage is a single
/// contiguous vector and copies are cheap.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  void fill(double v);
  void set_zero() { fill(0.0); }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  /// Exact element-wise equality (shape and bits of every value compare equal).
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix transpose(const Matrix& a);

/// op(A) * op(B) through the dispatched kernels.
Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a = false, bool trans_b = false);

/// C = alpha * op(A) * op(B) + beta * C; C must already have the result shape.
void gemm(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, double alpha,
          double beta, Matrix& c);

/// A ⊗ B with the usual block layout: block (i,j) equals A(i,j) * B.
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorization, returned as an (rows*cols) x 1 matrix.
Matrix vec(const Matrix& a);
/// Inverse of vec for a given shape.
Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
/// Induced infinity norm: largest absolute row sum.
double inf_norm(const Matrix& a);
bool is_symmetric(const Matrix& a, double tol = 0.0);

/// Largest singular value by power iteration on AᵀA.
double spectral_norm(const Matrix& a, double tol = 1e-12, int max_iter = 10000);

/// Solves A X = B with partial-pivot LU. Throws PreconditionError when A is
/// numerically singular.
Matrix solve(const Matrix& a, const Matrix& b);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace stgc
