#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stgc/graph.hpp"
#include "stgc/matrix.hpp"

namespace stgc {

/// Channel coupling of an STGC layer. Independent mode filters each channel
/// on its own (diagonal mappings, d_in == d_out).
enum class SignalMode : std::uint8_t { dependent = 0, independent = 1 };

/// Default stability margin: Σ_k ‖W_k‖_∞ ≤ 1 - epsilon after projection.
inline constexpr double kStabilityEpsilon = 1e-3;

/// Learnable parameters of one layer.
///
/// Dependent mode: W_k is d_out x d_out (k < K1), V_k is d_in x d_out (k < K2).
/// Independent mode: every W_k and V_k is a 1 x d row holding the diagonal.
struct FilterBank {
  SignalMode mode = SignalMode::dependent;
  std::size_t K1 = 1;
  std::size_t K2 = 1;
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  std::vector<Matrix> W;
  std::vector<Matrix> V;

  static FilterBank zeros(SignalMode mode, std::size_t K1, std::size_t K2, std::size_t d_in,
                          std::size_t d_out);

  /// Uniform in [-s, s] with s = 1/(K1 d_out) for W and 1/(K2 max(d_in, d_out))
  /// for V, then projected into the stability region.
  static FilterBank random(SignalMode mode, std::size_t K1, std::size_t K2, std::size_t d_in,
                           std::size_t d_out, std::mt19937_64& rng,
                           double epsilon = kStabilityEpsilon);

  /// Throws DimensionError when counts or shapes are inconsistent.
  void validate() const;

  /// Dense W_k, V_k (diagonals expanded in independent mode).
  Matrix dense_w(std::size_t k) const;
  Matrix dense_v(std::size_t k) const;
  FilterBank to_dependent() const;

  friend bool operator==(const FilterBank&, const FilterBank&) = default;
};

/// Time-ordered node-signal matrices X_0 .. X_{T-1}, each n x d.
using SignalSequence = std::vector<Matrix>;

/// Everything a forward pass produced and needs for gradient replay.
/// hidden[0] is the zero initial state; hidden[t] and output[t-1] hold Y_t
/// and O_t for t = 1..T.
struct LayerTrace {
  SignalMode mode = SignalMode::dependent;
  std::vector<Matrix> hidden;
  std::vector<Matrix> output;
  SignalSequence inputs;
  std::vector<Matrix> receptive_fields;

  std::size_t steps() const noexcept { return output.size(); }
};

struct LayerGradients {
  std::vector<Matrix> dW;
  std::vector<Matrix> dV;
  SignalSequence dX;
};

/// Σ_{k<K} ψ_k(L) X V_k.
Matrix multiscale_conv(const StaticGraph& graph, const Matrix& signal,
                       std::span<const Matrix> mappings);

/// One recursion step from hidden state Y_t and input X_t.
struct StepResult {
  Matrix hidden;
  Matrix output;
};
StepResult forward_step(const StaticGraph& graph, const FilterBank& bank, const Matrix& hidden,
                        const Matrix& input);

/// Y_{t+1} = Σ_{k<K1} ψ_k Y_t W_k + X_t V_0,
/// O_{t+1} = Y_{t+1} + Σ_{1≤k<K2} ψ_k X_t V_k, from Y_0 = 0.
LayerTrace forward_dep(const StaticGraph& graph, const FilterBank& bank,
                       const SignalSequence& inputs);

/// Same recursion with diagonal mappings applied as column scalings.
LayerTrace forward_indep(const StaticGraph& graph, const FilterBank& bank,
                         const SignalSequence& inputs);

/// Dispatches on bank.mode.
LayerTrace forward(const StaticGraph& graph, const FilterBank& bank, const SignalSequence& inputs);

/// Reverse-mode gradients of Σ_t <dL/dO_t, O_t> through the unrolled
/// recursion. Gradient shapes follow the bank (diagonals in independent mode).
LayerGradients backward(const LayerTrace& trace, const FilterBank& bank,
                        const SignalSequence& output_grads);

/// Clips negative diagonal entries of every W_k to zero, then rescales all
/// W_k by a common factor when Σ_k ‖W_k‖_∞ > 1 - epsilon. V is untouched.
/// Idempotent: a bank that already satisfies both rules is returned as is.
FilterBank project_stable(const FilterBank& bank, double epsilon = kStabilityEpsilon);

/// Σ_k ‖W_k‖_∞ (diagonal rows count as diag matrices).
double temporal_norm_sum(const FilterBank& bank);

/// Exact check of the projection postconditions.
bool satisfies_stability_constraints(const FilterBank& bank, double epsilon = kStabilityEpsilon);

/// Binary container: 24-byte header (magic "STGC", u32 version, u8 mode, pad,
/// u16 K1, K2, d_in, d_out, pad) then little-endian f64 values of W then V,
/// row-major.
inline constexpr std::uint32_t kFilterBankVersion = 1;
inline constexpr std::size_t kFilterBankHeaderSize = 24;
std::vector<std::uint8_t> serialize(const FilterBank& bank);
FilterBank deserialize_filter_bank(std::span<const std::uint8_t> bytes);

}  // namespace stgc
