#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stgc/matrix.hpp"

namespace stgc {

inline constexpr std::size_t kMaxEigenSize = 256;

/// L = Φ diag(λ) Φᵀ with λ ascending and Φ orthogonal.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
  double reconstruction_error = 0.0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// Cyclic Jacobi rotations. Sweeps until the off-diagonal Frobenius norm is
/// below 1e-12 * max(1, ‖L‖_F), at most 100 sweeps. The result is checked
/// against `tol` (orthogonality and reconstruction, both relative to
/// max(1, ‖L‖_F)); a miss raises ConvergenceError with the residual.
SpectralDecomposition eigendecompose(const Matrix& symmetric, double tol = 1e-8);

/// Φᵀ X
Matrix gft(const SpectralDecomposition& decomp, const Matrix& signal);
/// Φ X̂
Matrix igft(const SpectralDecomposition& decomp, const Matrix& spectrum);

/// ψ_k(λ) = λ^k, the monomial receptive field evaluated on one eigenvalue.
double psi_value(double lambda, std::size_t k) noexcept;

/// Σ_k diag(ψ_k(λ)) X̂ V_k for dense mappings V_k (d x d').
Matrix frequency_response(const SpectralDecomposition& decomp, std::span<const Matrix> mappings,
                          const Matrix& spectrum);

/// Channel-independent form: Ẑ_ij = Σ_k v_kj ψ_k(λ_i) X̂_ij. Each mapping is
/// a 1 x d row holding the diagonal v_k.
Matrix frequency_response_indep(const SpectralDecomposition& decomp,
                                std::span<const Matrix> diagonals, const Matrix& spectrum);

/// H(λ_i) = Σ_k c_k ψ_k(λ_i) for every eigenvalue.
std::vector<double> polynomial_response(const SpectralDecomposition& decomp,
                                        std::span<const double> coefficients);

/// V = diag(alpha) Ṽ with alpha_i the largest |entry| of row i (1 for a zero
/// row). Entries of Ṽ are nudged by an ulp where needed so the product
/// reproduces V exactly whenever such a value exists.
struct RowScaling {
  std::vector<double> alpha;
  Matrix normalized;
};
RowScaling decompose_vk(const Matrix& mapping);

}  // namespace stgc
