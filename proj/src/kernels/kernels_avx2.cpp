// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include "stgc/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <vector>

namespace stgc::kernels {
namespace {

// Copies op(X) into a dense row-major rows x cols buffer.
const double* pack(bool trans, std::size_t rows, std::size_t cols, const double* x,
                   std::size_t ldx, std::vector<double>& buf) {
  if (!trans && ldx == cols) return x;
  buf.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t q = 0; q < cols; ++q)
      buf[r * cols + q] = trans ? x[q * ldx + r] : x[r * ldx + q];
  return buf.data();
}

inline void store_row(double* crow, const double* acc, std::size_t len, double alpha,
                      double beta) {
  if (beta == 0.0) {
    for (std::size_t j = 0; j < len; ++j) crow[j] = alpha * acc[j];
  } else {
    for (std::size_t j = 0; j < len; ++j) crow[j] = alpha * acc[j] + beta * crow[j];
  }
}

void gemm_avx2(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
               double alpha, const double* a, std::size_t lda, const double* b,
               std::size_t ldb, double beta, double* c, std::size_t ldc) {
  thread_local std::vector<double> abuf;
  thread_local std::vector<double> bbuf;
  const double* ap = pack(trans_a, m, k, a, lda, abuf);
  const double* bp = pack(trans_b, k, n, b, ldb, bbuf);

  alignas(32) double acc[16];
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = ap + i * k;
    double* crow = c + i * ldc;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256d c0 = _mm256_setzero_pd();
      __m256d c1 = _mm256_setzero_pd();
      __m256d c2 = _mm256_setzero_pd();
      __m256d c3 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(arow + p);
        const double* brow = bp + p * n + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
      }
      _mm256_store_pd(acc, c0);
      _mm256_store_pd(acc + 4, c1);
      _mm256_store_pd(acc + 8, c2);
      _mm256_store_pd(acc + 12, c3);
      store_row(crow + j, acc, 16, alpha, beta);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p)
        c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(arow + p), _mm256_loadu_pd(bp + p * n + j), c0);
      _mm256_store_pd(acc, c0);
      store_row(crow + j, acc, 4, alpha, beta);
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s = std::fma(arow[p], bp[p * n + j], s);
      store_row(crow + j, &s, 1, alpha, beta);
    }
  }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(s0, s1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_cols_acc_avx2(std::size_t m, std::size_t n, const double* a, std::size_t lda,
                         const double* s, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d v = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(s + j),
                                        _mm256_loadu_pd(crow + j));
      _mm256_storeu_pd(crow + j, v);
    }
    for (; j < n; ++j) crow[j] = std::fma(arow[j], s[j], crow[j]);
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::avx2, "avx2", &gemm_avx2, &dot_avx2, &axpy_avx2,
                             &scale_cols_acc_avx2};
}  // namespace detail

}  // namespace stgc::kernels
