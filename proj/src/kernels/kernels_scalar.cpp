#include "stgc/kernels.hpp"

#include <algorithm>
#include <vector>

namespace stgc::kernels {
namespace {

void gemm_scalar(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 double alpha, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double beta, double* c, std::size_t ldc) {
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = trans_a ? a[p * lda + i] : a[i * lda + p];
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) acc[j] += aip * b[j * ldb + p];
      } else {
        const double* brow = b + p * ldb;
        for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
      }
    }
    double* crow = c + i * ldc;
    if (beta == 0.0) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = alpha * acc[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) crow[j] = alpha * acc[j] + beta * crow[j];
    }
  }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_cols_acc_scalar(std::size_t m, std::size_t n, const double* a, std::size_t lda,
                           const double* s, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < n; ++j) crow[j] += arow[j] * s[j];
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::scalar, "scalar", &gemm_scalar, &dot_scalar, &axpy_scalar,
                               &scale_cols_acc_scalar};
}  // namespace detail

}  // namespace stgc::kernels
