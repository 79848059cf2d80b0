#include "stgc/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stgc/errors.hpp"

namespace stgc {
namespace {

void validate_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw GraphError("adjacency must be square");
  if (a.rows() == 0) throw GraphError("graph needs at least one node");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) throw GraphError("adjacency diagonal must be zero (self loop at node " +
                                         std::to_string(i) + ")");
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double w = a(i, j);
      if (!std::isfinite(w)) throw GraphError("adjacency has a non-finite weight");
      if (w < 0.0) throw GraphError("adjacency has a negative weight");
      if (w != a(j, i)) throw GraphError("adjacency is not symmetric");
    }
  }
}

}  // namespace

Matrix normalized_laplacian(const Matrix& adjacency) {
  validate_adjacency(adjacency);
  const std::size_t n = adjacency.rows();
  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double w : adjacency.row(i)) deg += w;
    if (deg > 0.0) inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (inv_sqrt_deg[i] == 0.0) continue;
    l(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = -adjacency(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j];
      l(i, j) = v;
      l(j, i) = v;
    }
  }
  return l;
}

Matrix scale_laplacian(const Matrix& laplacian) {
  if (!is_symmetric(laplacian)) throw GraphError("laplacian must be symmetric");
  return 0.5 * laplacian;
}

StaticGraph::StaticGraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
  laplacian_norm_ = normalized_laplacian(adjacency_);
  laplacian_scaled_ = scale_laplacian(laplacian_norm_);
  psi_.reserve(kCachedOrders);
  psi_.push_back(Matrix::identity(n_nodes()));
  for (std::size_t k = 1; k < kCachedOrders; ++k)
    psi_.push_back(k == 1 ? laplacian_scaled_ : matmul(psi_.back(), laplacian_scaled_));
}

const Matrix& StaticGraph::psi(std::size_t k) const {
  if (k >= psi_.size())
    throw std::out_of_range("receptive field order " + std::to_string(k) + " is not cached");
  return psi_[k];
}

StaticGraph build_from_bones(std::size_t n_nodes, const std::vector<Bone>& bones) {
  if (n_nodes == 0) throw GraphError("graph needs at least one node");
  Matrix a(n_nodes, n_nodes);
  for (const auto& [i, j] : bones) {
    if (i >= n_nodes || j >= n_nodes)
      throw GraphError("bone (" + std::to_string(i) + "," + std::to_string(j) +
                       ") references a joint outside [0, " + std::to_string(n_nodes) + ")");
    if (i == j) throw GraphError("bone (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") is a self loop");
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return StaticGraph(std::move(a));
}

ReceptiveField receptive_field(const StaticGraph& graph, std::size_t k) {
  if (k < kCachedOrders) return {k, graph.psi(k)};
  Matrix m = graph.psi(kCachedOrders - 1);
  for (std::size_t p = kCachedOrders - 1; p < k; ++p) m = matmul(m, graph.laplacian_scaled());
  return {k, std::move(m)};
}

StaticGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    throw FormatError(std::string("edge list: missing ") + what, 0, line_no + 1);
  };

  next_line("header");
  std::istringstream header(line);
  long long n = 0;
  long long m = 0;
  if (!(header >> n >> m) || n <= 0 || m < 0)
    throw FormatError("edge list: header must be `n m` with n > 0, m >= 0", 0, line_no);

  Matrix a(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (long long e = 0; e < m; ++e) {
    next_line("edge");
    std::istringstream row(line);
    long long i = -1;
    long long j = -1;
    double w = 1.0;
    if (!(row >> i >> j)) throw FormatError("edge list: expected `i j [w]`", 0, line_no);
    if (!(row >> w)) w = 1.0;
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw GraphError("edge list line " + std::to_string(line_no) + ": node index out of range");
    if (i == j) throw GraphError("edge list line " + std::to_string(line_no) + ": self loop");
    a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = w;
    a(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = w;
  }
  return StaticGraph(std::move(a));
}

StaticGraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path.string());
  return read_edge_list(in);
}

const std::vector<Bone>& ntu_bones() {
  static const std::vector<Bone> bones = [] {
    // 1-based joint pairs as published with the dataset.
    const int pairs[24][2] = {{1, 2},   {2, 21},  {3, 21},  {4, 3},   {5, 21},  {6, 5},
                              {7, 6},   {8, 7},   {9, 21},  {10, 9},  {11, 10}, {12, 11},
                              {13, 1},  {14, 13}, {15, 14}, {16, 15}, {17, 1},  {18, 17},
                              {19, 18}, {20, 19}, {22, 23}, {23, 8},  {24, 25}, {25, 12}};
    std::vector<Bone> out;
    for (const auto& p : pairs)
      out.emplace_back(static_cast<std::size_t>(p[0] - 1), static_cast<std::size_t>(p[1] - 1));
    return out;
  }();
  return bones;
}

}  // namespace stgc
