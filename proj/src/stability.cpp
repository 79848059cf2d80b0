#include "stgc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stgc/errors.hpp"

namespace stgc {
namespace {

constexpr double kPsiNormSlack = 1e-12;

std::vector<Matrix> dense_ws(const FilterBank& bank) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < bank.K1; ++k) out.push_back(bank.dense_w(k));
  return out;
}

std::vector<Matrix> dense_vs(const FilterBank& bank) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < bank.K2; ++k) out.push_back(bank.dense_v(k));
  return out;
}

void require_psi_contraction(const SpectralDecomposition& decomp, std::size_t orders) {
  for (std::size_t k = 1; k < orders; ++k)
    for (double lambda : decomp.eigenvalues)
      if (std::abs(psi_value(lambda, k)) > 1.0 + kPsiNormSlack)
        throw PreconditionError("receptive field psi_" + std::to_string(k) +
                                "(L) has spectral norm above 1");
}

}  // namespace

Matrix gamma(std::span<const Matrix> params, const SpectralDecomposition& decomp, std::size_t a,
             std::size_t b) {
  if (a > b || b > params.size())
    throw DimensionError("gamma: range [" + std::to_string(a) + ", " + std::to_string(b) +
                         ") outside parameter list of length " + std::to_string(params.size()));
  const std::size_t n = decomp.size();
  const std::size_t p = params.empty() ? 0 : params.front().rows();
  const std::size_t q = params.empty() ? 0 : params.front().cols();
  Matrix g(q * n, p * n);
  for (std::size_t k = a; k < b; ++k) {
    const Matrix& m = params[k];
    if (m.rows() != p || m.cols() != q) throw DimensionError("gamma: parameter shapes differ");
    // Block (r, s) of m_kᵀ ⊗ ψ_k(Λ) is m(s, r) ψ_k(Λ).
    for (std::size_t r = 0; r < q; ++r)
      for (std::size_t s = 0; s < p; ++s) {
        const double c = m(s, r);
        if (c == 0.0) continue;
        for (std::size_t l = 0; l < n; ++l)
          g(r * n + l, s * n + l) += c * psi_value(decomp.eigenvalues[l], k);
      }
  }
  return g;
}

SpectralDecomposition graph_spectrum(const StaticGraph& graph) {
  return eigendecompose(graph.laplacian_scaled());
}

LimitOperator limit_operator(const StaticGraph& graph, const FilterBank& bank) {
  return limit_operator(graph_spectrum(graph), bank);
}

LimitOperator limit_operator(const SpectralDecomposition& decomp, const FilterBank& bank) {
  bank.validate();
  const bool indep = bank.mode == SignalMode::independent;
  for (std::size_t k = 0; k < bank.K1; ++k) {
    const Matrix& w = bank.W[k];
    for (std::size_t i = 0; i < bank.d_out; ++i)
      if ((indep ? w(0, i) : w(i, i)) < 0.0)
        throw PreconditionError("W_" + std::to_string(k) + " has a negative diagonal entry");
  }
  const double wsum = temporal_norm_sum(bank);
  if (!(wsum < 1.0))
    throw PreconditionError("sum of ||W_k||_inf is " + std::to_string(wsum) + ", must be < 1");
  require_psi_contraction(decomp, std::max(bank.K1, bank.K2));

  const std::vector<Matrix> ws = dense_ws(bank);
  const std::vector<Matrix> vs = dense_vs(bank);
  const std::size_t n = decomp.size();

  Matrix system = Matrix::identity(n * bank.d_out) - gamma(ws, decomp, 0, bank.K1);
  LimitOperator out;
  out.mode = SignalMode::dependent;
  out.transfer = solve(system, gamma(vs, decomp, 0, 1));
  if (bank.K2 > 1) out.transfer += gamma(vs, decomp, 1, bank.K2);
  out.spectral_norm = spectral_norm(out.transfer);

  double tail = 0.0;
  for (std::size_t k = 1; k < bank.K2; ++k) tail += inf_norm(vs[k]);
  out.upper_bound = inf_norm(vs[0]) / (1.0 - wsum) + tail;
  return out;
}

LimitOperator limit_operator_indep(const StaticGraph& graph, const FilterBank& bank) {
  return limit_operator_indep(graph_spectrum(graph), bank);
}

LimitOperator limit_operator_indep(const SpectralDecomposition& decomp, const FilterBank& bank) {
  bank.validate();
  if (bank.mode != SignalMode::independent)
    throw DimensionError("limit_operator_indep needs an independent bank");
  const std::size_t n = decomp.size();
  const std::size_t d = bank.d_out;
  for (std::size_t k = 0; k < bank.K1; ++k)
    for (double w : bank.W[k].values())
      if (w < 0.0) throw PreconditionError("w_" + std::to_string(k) + " has a negative entry");

  LimitOperator out;
  out.mode = SignalMode::independent;
  out.transfer = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = decomp.eigenvalues[i];
    for (std::size_t j = 0; j < d; ++j) {
      double ar = 0.0;
      for (std::size_t k = 0; k < bank.K1; ++k) ar += bank.W[k](0, j) * psi_value(lambda, k);
      if (!(std::abs(ar) < 1.0))
        throw PreconditionError("|sum_k w_kj psi_k(lambda_i)| >= 1 at i=" + std::to_string(i) +
                                ", j=" + std::to_string(j));
      double value = bank.V[0](0, j) / (1.0 - ar);
      for (std::size_t k = 1; k < bank.K2; ++k) value += bank.V[k](0, j) * psi_value(lambda, k);
      out.transfer(i, j) = value;
    }
  }
  out.spectral_norm = max_abs(out.transfer);

  double wsum = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < bank.K1; ++k) s += bank.W[k](0, j);
    wsum = std::max(wsum, std::abs(s));
  }
  double tail = 0.0;
  for (std::size_t k = 1; k < bank.K2; ++k) tail += max_abs(bank.V[k]);
  out.upper_bound = wsum < 1.0 ? max_abs(bank.V[0]) / (1.0 - wsum) + tail
                               : std::numeric_limits<double>::infinity();
  return out;
}

SbddReport check_sbdd(const StaticGraph& graph, const FilterBank& bank) {
  return check_sbdd(graph_spectrum(graph), bank);
}

SbddReport check_sbdd(const SpectralDecomposition& decomp, const FilterBank& bank) {
  bank.validate();
  const std::vector<Matrix> ws = dense_ws(bank);
  const std::size_t d = bank.d_out;
  SbddReport report;
  report.margins.resize(d);
  report.strictly_dominant = true;

  auto block_entry = [&](std::size_t i, std::size_t j, double lambda) {
    double s = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) s += ws[k](i, j) * psi_value(lambda, k);
    return s;
  };

  for (std::size_t i = 0; i < d; ++i) {
    double diag_inv_norm = std::numeric_limits<double>::infinity();
    for (double lambda : decomp.eigenvalues)
      diag_inv_norm = std::min(diag_inv_norm, std::abs(1.0 - block_entry(i, i, lambda)));
    double off = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (j == i) continue;
      double block_norm = 0.0;
      for (double lambda : decomp.eigenvalues)
        block_norm = std::max(block_norm, std::abs(block_entry(i, j, lambda)));
      off += block_norm;
    }
    report.margins[i] = diag_inv_norm - off;
    if (!(report.margins[i] > 0.0)) report.strictly_dominant = false;
  }
  return report;
}

ConvergenceReport empirical_converge(const StaticGraph& graph, const FilterBank& bank,
                                     const Matrix& signal, double tol, std::size_t t_max) {
  const SpectralDecomposition decomp = graph_spectrum(graph);
  const Matrix spectrum = gft(decomp, signal);

  Matrix target;
  if (bank.mode == SignalMode::independent) {
    const LimitOperator op = limit_operator_indep(decomp, bank);
    target = Matrix(spectrum.rows(), spectrum.cols());
    for (std::size_t i = 0; i < target.rows(); ++i)
      for (std::size_t j = 0; j < target.cols(); ++j)
        target(i, j) = op.transfer(i, j) * spectrum(i, j);
    target = vec(target);
  } else {
    const LimitOperator op = limit_operator(decomp, bank);
    target = matmul(op.transfer, vec(spectrum));
  }
  const double scale = std::max(1.0, frobenius_norm(target));

  Matrix hidden(graph.n_nodes(), bank.d_out);
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= t_max; ++t) {
    StepResult s = forward_step(graph, bank, hidden, signal);
    hidden = std::move(s.hidden);
    residual = frobenius_norm(vec(gft(decomp, s.output)) - target) / scale;
    if (residual <= tol) return {t, residual};
  }
  throw ConvergenceError("empirical_converge: no convergence within " + std::to_string(t_max) +
                             " steps",
                         residual);
}

}  // namespace stgc
