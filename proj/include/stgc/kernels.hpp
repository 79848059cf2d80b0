#pragma once

// Dense double-precision inner loops. Every routine has a portable scalar
// reference and, where the CPU supports it, an AVX2+FMA variant. The variant
// is chosen once at first use; STGC_KERNELS=scalar in the environment forces
// the reference path.

#include <cstddef>

namespace stgc::kernels {

enum class Isa { scalar, avx2 };

/// C = alpha * op(A) * op(B) + beta * C, all row-major. op(A) is m x k,
/// op(B) is k x n. With beta == 0 the old contents of C are ignored.
/// Every C entry is accumulated over k in ascending order before alpha and
/// beta are applied, so variants differ only by FMA rounding.
using GemmFn = void (*)(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                        std::size_t k, double alpha, const double* a, std::size_t lda,
                        const double* b, std::size_t ldb, double beta, double* c,
                        std::size_t ldc);

using DotFn = double (*)(const double* x, const double* y, std::size_t n);

/// y += alpha * x
using AxpyFn = void (*)(std::size_t n, double alpha, const double* x, double* y);

/// C[i,j] += A[i,j] * s[j] for an m x n block (column scaling, accumulated).
using ScaleColsAccFn = void (*)(std::size_t m, std::size_t n, const double* a,
                                std::size_t lda, const double* s, double* c,
                                std::size_t ldc);

struct KernelTable {
  Isa isa;
  const char* name;
  GemmFn gemm;
  DotFn dot;
  AxpyFn axpy;
  ScaleColsAccFn scale_cols_acc;
};

/// True when the variant was compiled in and the running CPU supports it.
bool available(Isa isa) noexcept;

/// Table for a specific variant. Throws std::runtime_error if unavailable.
const KernelTable& table(Isa isa);

/// The dispatched table used by the library.
const KernelTable& active() noexcept;

namespace detail {
extern const KernelTable kScalarTable;
#if defined(STGC_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace stgc::kernels
