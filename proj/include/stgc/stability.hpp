#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stgc/graph.hpp"
#include "stgc/layer.hpp"
#include "stgc/matrix.hpp"
#include "stgc/spectral.hpp"

namespace stgc {

/// Closed-form steady state of the recursion under a constant input, in
/// graph-frequency coordinates.
///
/// Dependent mode: `transfer` is the (n d_out) x (n d_in) matrix mapping
/// vec(X̂) to lim vec(Ô_t), vec stacking columns.
/// Independent mode: `transfer` is n x d and acts elementwise on X̂.
struct LimitOperator {
  SignalMode mode = SignalMode::dependent;
  Matrix transfer;
  /// Analytic bound: ‖V_0‖_∞ / (1 - Σ_k ‖W_k‖_∞) + Σ_{k≥1} ‖V_k‖_∞
  /// (elementwise vector norms in independent mode).
  double upper_bound = 0.0;
  /// ‖transfer‖_2 (dependent) or max_ij |transfer_ij| (independent).
  double spectral_norm = 0.0;

  bool bound_holds() const noexcept { return spectral_norm < upper_bound; }
};

/// Σ_{k=a}^{b-1} P_kᵀ ⊗ ψ_k(Λ), with ψ_k(Λ) = diag(λ^k). `params` are dense.
Matrix gamma(std::span<const Matrix> params, const SpectralDecomposition& decomp, std::size_t a,
             std::size_t b);

/// Eigendecomposition of the graph's scaled Laplacian (the operator ψ_k acts on).
SpectralDecomposition graph_spectrum(const StaticGraph& graph);

/// (I - Γ_0^{K1}(W))^{-1} Γ_0^1(V) + Γ_1^{K2}(V). Throws PreconditionError
/// naming the violated condition when W has a negative diagonal entry,
/// Σ_k ‖W_k‖_∞ ≥ 1, or some ‖ψ_k(L)‖_2 > 1. Accepts independent banks by
/// expanding their diagonals.
LimitOperator limit_operator(const StaticGraph& graph, const FilterBank& bank);
LimitOperator limit_operator(const SpectralDecomposition& decomp, const FilterBank& bank);

/// Elementwise limit for channel-independent banks:
/// T_ij = v_0j / (1 - Σ_k w_kj λ_i^k) + Σ_{k≥1} v_kj λ_i^k.
/// Requires w ≥ 0 and |Σ_k w_kj λ_i^k| < 1 for every (i, j).
LimitOperator limit_operator_indep(const StaticGraph& graph, const FilterBank& bank);
LimitOperator limit_operator_indep(const SpectralDecomposition& decomp, const FilterBank& bank);

/// Block dominance of I - Σ_k W_k ⊗ ψ_k(Λ) (d_out x d_out blocks, each
/// diagonal): margin_i = min_l |1 - Σ_k W_k,ii λ_l^k| - Σ_{j≠i} max_l |Σ_k W_k,ij λ_l^k|.
struct SbddReport {
  bool strictly_dominant = false;
  std::vector<double> margins;
};
SbddReport check_sbdd(const StaticGraph& graph, const FilterBank& bank);
SbddReport check_sbdd(const SpectralDecomposition& decomp, const FilterBank& bank);

struct ConvergenceReport {
  std::size_t steps = 0;
  double residual = 0.0;
};

/// Runs the recursion with X_t ≡ signal and returns the first t at which
/// ‖vec(Ô_t) - T vec(X̂)‖ ≤ tol · max(1, ‖T vec(X̂)‖). Throws ConvergenceError
/// carrying the last relative residual if t_max steps do not suffice.
ConvergenceReport empirical_converge(const StaticGraph& graph, const FilterBank& bank,
                                     const Matrix& signal, double tol = 1e-6,
                                     std::size_t t_max = 500);

}  // namespace stgc
