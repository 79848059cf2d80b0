#pragma once

// Independent reference implementations for tests. Everything here works on
// plain nested vectors with naive loops and never calls into the library's
// numerical routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "stgc/matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense eye(std::size_t n) {
  Dense m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Dense to_dense(const stgc::Matrix& m) {
  Dense d = zeros(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

inline stgc::Matrix to_matrix(const Dense& d) {
  const std::size_t r = d.size();
  const std::size_t c = r ? d[0].size() : 0;
  stgc::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d[i][j];
  return m;
}

inline Dense mul(const Dense& a, const Dense& b) {
  const std::size_t r = a.size(), k = b.size(), c = b.empty() ? 0 : b[0].size();
  Dense out = zeros(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      long double s = 0.0L;
      for (std::size_t p = 0; p < k; ++p) s += static_cast<long double>(a[i][p]) * b[p][j];
      out[i][j] = static_cast<double>(s);
    }
  return out;
}

inline Dense add(Dense a, const Dense& b, double scale = 1.0) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += scale * b[i][j];
  return a;
}

inline Dense transpose(const Dense& a) {
  Dense t = zeros(a.empty() ? 0 : a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline double frob(const Dense& a) {
  long double s = 0.0L;
  for (const auto& r : a)
    for (double v : r) s += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(s));
}

inline double frob_diff(const Dense& a, const Dense& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const long double d = static_cast<long double>(a[i][j]) - b[i][j];
      s += d * d;
    }
  return static_cast<double>(std::sqrt(s));
}

inline double rel_frob(const Dense& got, const Dense& want) {
  return frob_diff(got, want) / std::max(frob(want), 1e-300);
}

/// Max absolute row sum.
inline double row_sum_norm(const Dense& a) {
  double best = 0.0;
  for (const auto& r : a) {
    double s = 0.0;
    for (double v : r) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

/// I - D^{-1/2} A D^{-1/2}, entry by entry; isolated nodes give zero rows.
inline Dense laplacian(const Dense& adj) {
  const std::size_t n = adj.size();
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += adj[i][j];
  Dense l = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (deg[i] == 0.0 || deg[j] == 0.0) continue;
      l[i][j] = (i == j ? 1.0 : 0.0) - adj[i][j] / std::sqrt(deg[i] * deg[j]);
    }
  return l;
}

/// Scaled Laplacian powers (L/2)^k for k < count.
inline std::vector<Dense> psi_powers(const Dense& adj, std::size_t count) {
  Dense s = laplacian(adj);
  for (auto& r : s)
    for (double& v : r) v *= 0.5;
  std::vector<Dense> out{eye(adj.size())};
  for (std::size_t k = 1; k < count; ++k) out.push_back(mul(out.back(), s));
  return out;
}

/// Hop distances from BFS over the nonzero pattern of `adj`; unreachable = max.
inline std::vector<std::vector<std::size_t>> hop_distances(const Dense& adj) {
  const std::size_t n = adj.size();
  const std::size_t inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, inf));
  for (std::size_t s = 0; s < n; ++s) {
    std::deque<std::size_t> q{s};
    dist[s][s] = 0;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      for (std::size_t v = 0; v < n; ++v)
        if (adj[u][v] != 0.0 && dist[s][v] == inf) {
          dist[s][v] = dist[s][u] + 1;
          q.push_back(v);
        }
    }
  }
  return dist;
}

/// Σ_k ψ_k X M_k.
inline Dense multiscale(const std::vector<Dense>& psi, const Dense& x, const std::vector<Dense>& maps) {
  Dense out = zeros(x.size(), maps.at(0)[0].size());
  for (std::size_t k = 0; k < maps.size(); ++k) out = add(out, mul(mul(psi[k], x), maps[k]));
  return out;
}

/// Runs the recursion Y_{t+1} = Σ ψ_k Y_t W_k + X_t V_0,
/// O_{t+1} = Y_{t+1} + Σ_{k≥1} ψ_k X_t V_k from Y_0 = 0 and returns O_1..O_T.
inline std::vector<Dense> recursion(const std::vector<Dense>& psi, const std::vector<Dense>& w,
                                    const std::vector<Dense>& v, const std::vector<Dense>& xs) {
  const std::size_t n = psi[0].size();
  const std::size_t d_out = w.at(0).size();
  Dense y = zeros(n, d_out);
  std::vector<Dense> outs;
  for (const Dense& x : xs) {
    Dense next = mul(x, v[0]);
    for (std::size_t k = 0; k < w.size(); ++k) next = add(next, mul(mul(psi[k], y), w[k]));
    y = next;
    Dense o = y;
    for (std::size_t k = 1; k < v.size(); ++k) o = add(o, mul(mul(psi[k], x), v[k]));
    outs.push_back(o);
  }
  return outs;
}

/// Largest singular value via power iteration on AᵀA from a deterministic start.
inline double spectral_norm(const Dense& a) {
  const std::size_t c = a.empty() ? 0 : a[0].size();
  if (c == 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  std::vector<double> x(c);
  for (double& v : x) v = g(rng);
  double sigma = 0.0;
  for (int it = 0; it < 20000; ++it) {
    std::vector<double> ax(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) ax[i] += a[i][j] * x[j];
    std::vector<double> y(c, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) y[j] += a[i][j] * ax[i];
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t j = 0; j < c; ++j) x[j] = y[j] / norm;
    const double next = std::sqrt(norm);
    if (std::abs(next - sigma) <= 1e-14 * next) return next;
    sigma = next;
  }
  return sigma;
}

inline Dense kron(const Dense& a, const Dense& b) {
  const std::size_t ar = a.size(), ac = a[0].size(), br = b.size(), bc = b[0].size();
  Dense out = zeros(ar * br, ac * bc);
  for (std::size_t i = 0; i < ar; ++i)
    for (std::size_t j = 0; j < ac; ++j)
      for (std::size_t p = 0; p < br; ++p)
        for (std::size_t q = 0; q < bc; ++q) out[i * br + p][j * bc + q] = a[i][j] * b[p][q];
  return out;
}

/// Gaussian elimination with partial pivoting for a single right-hand side.
inline std::vector<double> solve(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Column-stacking vectorisation.
inline std::vector<double> vec(const Dense& m) {
  std::vector<double> v;
  for (std::size_t j = 0; j < m[0].size(); ++j)
    for (std::size_t i = 0; i < m.size(); ++i) v.push_back(m[i][j]);
  return v;
}

inline Dense unvec(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  Dense m = zeros(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m[i][j] = v[j * rows + i];
  return m;
}

/// Fixed point of the recursion under a constant input, computed in the vertex
/// domain: vec(Y) = (I - Σ W_kᵀ ⊗ ψ_k)⁻¹ vec(X V_0), O = Y + Σ_{k≥1} ψ_k X V_k.
inline Dense fixed_point(const std::vector<Dense>& psi, const std::vector<Dense>& w,
                         const std::vector<Dense>& v, const Dense& x) {
  const std::size_t n = x.size();
  const std::size_t d_out = w[0].size();
  Dense sys = eye(n * d_out);
  for (std::size_t k = 0; k < w.size(); ++k) sys = add(sys, kron(transpose(w[k]), psi[k]), -1.0);
  const Dense y = unvec(solve(sys, vec(mul(x, v[0]))), n, d_out);
  Dense o = y;
  for (std::size_t k = 1; k < v.size(); ++k) o = add(o, mul(mul(psi[k], x), v[k]));
  return o;
}

inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Dense random_dense(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Dense m = zeros(r, c);
  for (auto& row : m)
    for (double& v : row) v = u(rng);
  return m;
}

/// Symmetric weighted adjacency; each pair joined with probability `density`.
inline Dense random_adjacency(std::size_t n, std::mt19937_64& rng, double density = 0.5) {
  std::bernoulli_distribution edge(density);
  std::uniform_real_distribution<double> w(0.5, 1.5);
  Dense a = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) a[i][j] = a[j][i] = w(rng);
  return a;
}

}  // namespace oracle
