#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <utility>
#include <vector>

#include "stgc/matrix.hpp"

namespace stgc {

using Bone = std::pair<std::size_t, std::size_t>;

/// Receptive fields ψ_k(L) = L^k of the scaled Laplacian are cached for
/// k < kCachedOrders; layer scale counts K1, K2 must not exceed this.
inline constexpr std::size_t kCachedOrders = 16;

/// Undirected weighted graph with its normalized Laplacian, the Laplacian
/// scaled into [0, 1] (divided by λ_max = 2), and cached powers of the latter.
/// Immutable after construction.
class StaticGraph {
 public:
  /// Validates the adjacency (square, symmetric, nonnegative, zero diagonal).
  explicit StaticGraph(Matrix adjacency);

  std::size_t n_nodes() const noexcept { return adjacency_.rows(); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  const Matrix& laplacian_norm() const noexcept { return laplacian_norm_; }
  const Matrix& laplacian_scaled() const noexcept { return laplacian_scaled_; }

  /// Cached ψ_k(L_scaled); throws std::out_of_range for k >= kCachedOrders.
  const Matrix& psi(std::size_t k) const;

 private:
  Matrix adjacency_;
  Matrix laplacian_norm_;
  Matrix laplacian_scaled_;
  std::vector<Matrix> psi_;
};

struct ReceptiveField {
  std::size_t order = 0;
  Matrix matrix;
};

/// Unit-weight undirected graph from a bone list. Duplicate bones collapse.
StaticGraph build_from_bones(std::size_t n_nodes, const std::vector<Bone>& bones);

/// I - D^{-1/2} A D^{-1/2}; rows and columns of isolated nodes are zero.
Matrix normalized_laplacian(const Matrix& adjacency);

/// L / 2, mapping a normalized Laplacian's spectrum into [0, 1].
Matrix scale_laplacian(const Matrix& laplacian);

/// ψ_k(L_scaled) = L_scaled^k by repeated multiplication (any k).
ReceptiveField receptive_field(const StaticGraph& graph, std::size_t k);

/// Edge-list text: first line `n m`, then m lines `i j [w]` (0-based, w
/// defaults to 1). Repeated edges keep the last weight.
StaticGraph read_edge_list(std::istream& in);
StaticGraph read_edge_list(const std::filesystem::path& path);

/// Bone list of the 25-joint NTU RGB+D (Kinect v2) skeleton, 0-based.
const std::vector<Bone>& ntu_bones();

}  // namespace stgc
