// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only if
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "stgc/data.hpp"
#include "stgc/graph.hpp"
#include "stgc/kernels.hpp"
#include "stgc/layer.hpp"
#include "stgc/model.hpp"
#include "stgc/spectral.hpp"
#include "stgc/stability.hpp"
#include "stgc/trainer.hpp"
#include "support/oracles.hpp"

using oracle::Dense;
using stgc::FilterBank;
using stgc::Matrix;
using stgc::SignalMode;

namespace {

struct Outcome {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

template <class T>
const T& pick_of(std::mt19937_64& rng, const std::vector<T>& options) {
  return options[pick(rng, 0, options.size() - 1)];
}

stgc::StaticGraph graph_of(const Dense& adj) { return stgc::StaticGraph(oracle::to_matrix(adj)); }

// Random bank with W entries in [-w_scale, w_scale] and V entries in
// [-v_scale, v_scale], then projected onto the stability set.
FilterBank random_bank(SignalMode mode, std::size_t K1, std::size_t K2, std::size_t d_in,
                       std::size_t d_out, std::mt19937_64& rng, double w_scale, double v_scale) {
  FilterBank b = FilterBank::zeros(mode, K1, K2, d_in, d_out);
  std::uniform_real_distribution<double> uw(-w_scale, w_scale);
  std::uniform_real_distribution<double> uv(-v_scale, v_scale);
  for (Matrix& w : b.W)
    for (double& x : w.values()) x = uw(rng);
  for (Matrix& v : b.V)
    for (double& x : v.values()) x = uv(rng);
  return stgc::project_stable(b, 1e-3);
}

std::vector<Dense> dense_ws(const FilterBank& b) {
  std::vector<Dense> out;
  for (std::size_t k = 0; k < b.K1; ++k) out.push_back(oracle::to_dense(b.dense_w(k)));
  return out;
}

std::vector<Dense> dense_vs(const FilterBank& b) {
  std::vector<Dense> out;
  for (std::size_t k = 0; k < b.K2; ++k) out.push_back(oracle::to_dense(b.dense_v(k)));
  return out;
}

Dense phi_t_times(const stgc::SpectralDecomposition& dec, const Dense& x) {
  return oracle::mul(oracle::transpose(oracle::to_dense(dec.eigenvectors)), x);
}

std::vector<double> mat_vec(const Dense& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

// Runs the oracle recursion with a constant input and returns the first step
// whose frequency-domain output is within `tol` (relative) of `target`, or 0.
std::size_t steps_to_converge(const std::vector<Dense>& psi, const std::vector<Dense>& w,
                              const std::vector<Dense>& v, const Dense& x,
                              const stgc::SpectralDecomposition& dec, const Dense& target,
                              double tol, std::size_t t_max, double& residual) {
  const std::size_t n = x.size();
  Dense y = oracle::zeros(n, w[0].size());
  Dense ma = oracle::zeros(n, w[0].size());
  for (std::size_t k = 1; k < v.size(); ++k) ma = oracle::add(ma, oracle::mul(oracle::mul(psi[k], x), v[k]));
  const Dense xv0 = oracle::mul(x, v[0]);
  const double scale = std::max(1.0, oracle::frob(target));
  for (std::size_t t = 1; t <= t_max; ++t) {
    Dense next = xv0;
    for (std::size_t k = 0; k < w.size(); ++k) next = oracle::add(next, oracle::mul(oracle::mul(psi[k], y), w[k]));
    y = std::move(next);
    const Dense o_hat = phi_t_times(dec, oracle::add(y, ma));
    residual = oracle::frob_diff(o_hat, target) / scale;
    if (residual <= tol) return t;
  }
  return 0;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Stopwatch sw;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  double worst_oracle = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = pick_of<std::size_t>(rng, {4, 8, 16});
    const std::size_t d = pick_of<std::size_t>(rng, {1, 3});
    const std::size_t K = pick_of<std::size_t>(rng, {1, 2, 4});
    const std::size_t dp = pick_of<std::size_t>(rng, {1, 4});
    const Dense adj = oracle::random_adjacency(n, rng);
    const Dense x = oracle::random_dense(n, d, rng);
    std::vector<Dense> maps;
    std::vector<Matrix> lib_maps;
    for (std::size_t k = 0; k < K; ++k) {
      maps.push_back(oracle::random_dense(d, dp, rng));
      lib_maps.push_back(oracle::to_matrix(maps.back()));
    }
    const stgc::StaticGraph g = graph_of(adj);
    const stgc::SpectralDecomposition dec = stgc::graph_spectrum(g);
    const Dense spatial = oracle::to_dense(stgc::multiscale_conv(g, oracle::to_matrix(x), lib_maps));
    const Dense spectral = oracle::to_dense(stgc::igft(
        dec, stgc::frequency_response(dec, lib_maps, stgc::gft(dec, oracle::to_matrix(x)))));
    const Dense reference = oracle::multiscale(oracle::psi_powers(adj, K), x, maps);
    worst = std::max(worst, oracle::rel_frob(spatial, spectral));
    worst_oracle = std::max({worst_oracle, oracle::rel_frob(spatial, reference),
                             oracle::rel_frob(spectral, reference)});
  }
  const double secs = sw.seconds();
  Outcome o{1, "spatial filtering equals igft . frequency_response . gft (50 instances)"};
  o.passed = worst <= 1e-8 && worst_oracle <= 1e-8 && secs < 10.0;
  o.detail = "max rel err " + sci(worst) + ", vs naive oracle " + sci(worst_oracle) +
             " (limit 1e-8, < 10 s)";
  o.seconds = secs;
  return o;
}

struct StabilityInstance {
  Dense adj;
  FilterBank bank;
};

std::vector<StabilityInstance> criterion2_instances() {
  std::mt19937_64 rng(202);
  std::vector<StabilityInstance> out;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = pick(rng, 2, 8);
    const std::size_t d = pick(rng, 1, 3);
    const std::size_t dp = pick(rng, 1, 3);
    const std::size_t K1 = pick(rng, 1, 3);
    const std::size_t K2 = pick(rng, 1, 4);
    StabilityInstance s;
    s.adj = oracle::random_adjacency(n, rng);
    s.bank = random_bank(SignalMode::dependent, K1, K2, d, dp, rng, 0.6, 1.0);
    out.push_back(std::move(s));
  }
  return out;
}

double analytic_bound(const FilterBank& b) {
  double wsum = 0.0;
  for (std::size_t k = 0; k < b.K1; ++k) wsum += oracle::row_sum_norm(oracle::to_dense(b.dense_w(k)));
  double bound = oracle::row_sum_norm(oracle::to_dense(b.dense_v(0))) / (1.0 - wsum);
  for (std::size_t k = 1; k < b.K2; ++k) bound += oracle::row_sum_norm(oracle::to_dense(b.dense_v(k)));
  return bound;
}

Outcome criterion2(const std::vector<StabilityInstance>& instances) {
  Stopwatch sw;
  std::mt19937_64 rng(203);
  std::size_t converged = 0;
  std::size_t bound_ok = 0;
  std::size_t slowest = 0;
  double worst_residual = 0.0;
  double worst_fixed = 0.0;
  double worst_norm = 0.0;
  double worst_bound = 0.0;
  double worst_excess = -1e300;
  std::string excess_at;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& [adj, bank] = instances[i];
    const std::size_t n = adj.size();
    const stgc::StaticGraph g = graph_of(adj);
    const stgc::SpectralDecomposition dec = stgc::graph_spectrum(g);
    const stgc::LimitOperator lo = stgc::limit_operator(dec, bank);
    const Dense x = oracle::random_dense(n, bank.d_in, rng);
    const Dense t = oracle::to_dense(lo.transfer);
    const Dense target = oracle::unvec(mat_vec(t, oracle::vec(phi_t_times(dec, x))), n, bank.d_out);
    const auto psi = oracle::psi_powers(adj, std::max(bank.K1, bank.K2));
    const auto w = dense_ws(bank);
    const auto v = dense_vs(bank);
    double residual = 0.0;
    const std::size_t steps = steps_to_converge(psi, w, v, x, dec, target, 1e-6, 500, residual);
    if (steps > 0) ++converged;
    slowest = std::max(slowest, steps);
    worst_residual = std::max(worst_residual, residual);
    const Dense fixed = phi_t_times(dec, oracle::fixed_point(psi, w, v, x));
    worst_fixed = std::max(worst_fixed, oracle::frob_diff(fixed, target) / std::max(1.0, oracle::frob(target)));

    const double norm = oracle::spectral_norm(t);
    const double bound = analytic_bound(bank);
    worst_norm = std::max(worst_norm, oracle::rel_err(norm, lo.spectral_norm, 1e-12));
    worst_bound = std::max(worst_bound, oracle::rel_err(bound, lo.upper_bound, 1e-12));
    if (norm < bound) ++bound_ok;
    if (norm - bound > worst_excess) {
      worst_excess = norm - bound;
      excess_at = "instance " + std::to_string(i) + " (d=" + std::to_string(bank.d_in) +
                  ", d'=" + std::to_string(bank.d_out) + ", K1=" + std::to_string(bank.K1) +
                  ", K2=" + std::to_string(bank.K2) + ")";
    }
  }
  const double secs = sw.seconds();
  const std::size_t total = instances.size();
  Outcome o{2, "constant-input recursion reaches the limit operator; ||T||_2 below the analytic bound"};
  o.passed = converged == total && worst_fixed <= 1e-9 && worst_norm <= 1e-8 && worst_bound <= 1e-12 &&
             bound_ok == total && secs < 30.0;
  std::ostringstream d;
  d << "converged " << converged << "/" << total << " (slowest " << slowest << " steps, worst residual "
    << sci(worst_residual) << " <= 1e-6); vertex-domain fixed point agrees to " << sci(worst_fixed)
    << "; bound strict on " << bound_ok << "/" << total << " (largest ||T||_2 - bound = "
    << sci(worst_excess) << " at " << excess_at << ")";
  o.detail = d.str();
  o.seconds = secs;
  return o;
}

Outcome criterion3() {
  Stopwatch sw;
  std::mt19937_64 rng(303);
  std::size_t converged = 0;
  std::size_t bound_ok = 0;
  double worst_residual = 0.0;
  double worst_agree = 0.0;
  double worst_excess = -1e300;
  const std::size_t total = 20;
  for (std::size_t inst = 0; inst < total; ++inst) {
    const std::size_t n = pick(rng, 2, 8);
    const std::size_t d = pick(rng, 1, 3);
    const std::size_t K1 = pick(rng, 1, 3);
    const std::size_t K2 = pick(rng, 1, 4);
    const Dense adj = oracle::random_adjacency(n, rng);
    const FilterBank bank = random_bank(SignalMode::independent, K1, K2, d, d, rng, 0.6, 1.0);
    const stgc::StaticGraph g = graph_of(adj);
    const stgc::SpectralDecomposition dec = stgc::graph_spectrum(g);
    const stgc::LimitOperator lo = stgc::limit_operator_indep(dec, bank);
    const Dense x = oracle::random_dense(n, d, rng);
    const Dense x_hat = phi_t_times(dec, x);
    Dense target = x_hat;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) target[i][j] *= lo.transfer(i, j);

    const auto psi = oracle::psi_powers(adj, std::max(K1, K2));
    double residual = 0.0;
    if (steps_to_converge(psi, dense_ws(bank), dense_vs(bank), x, dec, target, 1e-6, 500, residual) > 0)
      ++converged;
    worst_residual = std::max(worst_residual, residual);

    const stgc::LimitOperator dep = stgc::limit_operator(dec, bank.to_dependent());
    for (std::size_t r = 0; r < n * d; ++r)
      for (std::size_t c = 0; c < n * d; ++c) {
        const double want = r == c ? lo.transfer(r % n, r / n) : 0.0;
        worst_agree = std::max(worst_agree, std::abs(dep.transfer(r, c) - want));
      }

    // |T_ij| < |v_0|_inf / (1 - |Σ w_k|_inf) + Σ_{k≥1} |v_k|_inf
    double wsum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < K1; ++k) s += bank.W[k](0, j);
      wsum = std::max(wsum, std::abs(s));
    }
    auto vmax = [&](std::size_t k) {
      double m = 0.0;
      for (std::size_t j = 0; j < d; ++j) m = std::max(m, std::abs(bank.V[k](0, j)));
      return m;
    };
    double bound = vmax(0) / (1.0 - wsum);
    for (std::size_t k = 1; k < K2; ++k) bound += vmax(k);
    bool ok = true;
    for (double t : lo.transfer.values()) {
      ok = ok && std::abs(t) < bound;
      worst_excess = std::max(worst_excess, std::abs(t) - bound);
    }
    if (ok) ++bound_ok;
  }
  const double secs = sw.seconds();
  Outcome o{3, "independent-mode recursion reaches the elementwise limit; agrees with dependent mode"};
  o.passed = converged == total && worst_agree <= 1e-10 && bound_ok == total;
  std::ostringstream d;
  d << "converged " << converged << "/" << total << " (worst residual " << sci(worst_residual)
    << " <= 1e-6); max |T_dep - diag(T_indep)| " << sci(worst_agree) << " <= 1e-10; elementwise bound strict on "
    << bound_ok << "/" << total << " (largest |T_ij| - bound = " << sci(worst_excess) << ")";
  o.detail = d.str();
  o.seconds = secs;
  return o;
}

Outcome criterion4(const std::vector<StabilityInstance>& instances) {
  Stopwatch sw;
  double worst_norm = 0.0;
  double worst_gamma = 0.0;
  std::size_t sbdd = 0;
  for (const auto& [adj, bank] : instances) {
    const stgc::SpectralDecomposition dec = stgc::graph_spectrum(graph_of(adj));
    const std::size_t n = adj.size();
    Dense gamma = oracle::zeros(n * bank.d_out, n * bank.d_out);
    for (std::size_t k = 0; k < bank.K1; ++k) {
      Dense lam = oracle::zeros(n, n);
      for (std::size_t i = 0; i < n; ++i) lam[i][i] = std::pow(dec.eigenvalues[i], static_cast<double>(k));
      gamma = oracle::add(gamma, oracle::kron(oracle::transpose(oracle::to_dense(bank.W[k])), lam));
    }
    const Dense lib = oracle::to_dense(stgc::gamma(bank.W, dec, 0, bank.K1));
    worst_gamma = std::max(worst_gamma, oracle::frob_diff(lib, gamma));
    worst_norm = std::max(worst_norm, oracle::spectral_norm(gamma));
    if (stgc::check_sbdd(dec, bank).strictly_dominant) ++sbdd;
  }
  Outcome o{4, "||Gamma_0^K1(W, Lambda)||_2 < 1 and strict block diagonal dominance"};
  o.passed = worst_norm < 1.0 && worst_gamma <= 1e-12 && sbdd == instances.size();
  o.detail = "max ||Gamma||_2 " + sci(worst_norm) + " < 1; SBDD on " + std::to_string(sbdd) + "/" +
             std::to_string(instances.size()) + "; gamma vs kron oracle " + sci(worst_gamma);
  o.seconds = sw.seconds();
  return o;
}

// Central differences of `f` with respect to every entry of `params`. When
// `pattern` is given, entries whose ±h stencil changes it (a rectifier kink
// inside the stencil, where the function is not differentiable) are skipped.
double worst_fd_error(std::vector<std::span<double>> params, std::vector<std::span<const double>> grads,
                      const std::function<double()>& f, std::size_t& checked, std::size_t& skipped,
                      const std::function<std::vector<bool>()>& pattern = {}) {
  constexpr double h = 1e-5;
  const std::vector<bool> base = pattern ? pattern() : std::vector<bool>{};
  double worst = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b)
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      double& p = params[b][i];
      const double keep = p;
      p = keep + h;
      const double up = f();
      const bool kink_up = pattern && pattern() != base;
      p = keep - h;
      const double down = f();
      const bool kink_down = pattern && pattern() != base;
      p = keep;
      if (kink_up || kink_down) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, oracle::rel_err(grads[b][i], (up - down) / (2.0 * h)));
      ++checked;
    }
  return worst;
}

Outcome criterion5() {
  Stopwatch sw;
  std::mt19937_64 rng(505);
  double worst_layer = 0.0;
  double worst_model = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = pick(rng, 2, 8);
    const std::size_t T = pick(rng, 1, 6);
    const Dense adj = oracle::random_adjacency(n, rng);
    const stgc::StaticGraph g = graph_of(adj);

    // Layer level: objective Σ_t <G_t, O_t>.
    {
      const SignalMode mode = inst % 2 ? SignalMode::independent : SignalMode::dependent;
      const std::size_t d_in = pick(rng, 1, 3);
      const std::size_t d_out = mode == SignalMode::independent ? d_in : pick(rng, 1, 3);
      FilterBank bank = random_bank(mode, pick(rng, 1, 3), pick(rng, 1, 3), d_in, d_out, rng, 0.6, 1.0);
      stgc::SignalSequence xs, gs;
      for (std::size_t t = 0; t < T; ++t) {
        xs.push_back(oracle::to_matrix(oracle::random_dense(n, d_in, rng)));
        gs.push_back(oracle::to_matrix(oracle::random_dense(n, d_out, rng)));
      }
      const auto objective = [&] {
        const stgc::LayerTrace tr = stgc::forward(g, bank, xs);
        double s = 0.0;
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t i = 0; i < gs[t].size(); ++i) s += gs[t].values()[i] * tr.output[t].values()[i];
        return s;
      };
      const stgc::LayerGradients grads = stgc::backward(stgc::forward(g, bank, xs), bank, gs);
      std::vector<std::span<double>> params;
      std::vector<std::span<const double>> gviews;
      for (std::size_t k = 0; k < bank.K1; ++k) {
        params.push_back(bank.W[k].values());
        gviews.push_back(grads.dW[k].values());
      }
      for (std::size_t k = 0; k < bank.K2; ++k) {
        params.push_back(bank.V[k].values());
        gviews.push_back(grads.dV[k].values());
      }
      for (std::size_t t = 0; t < T; ++t) {
        params.push_back(xs[t].values());
        gviews.push_back(grads.dX[t].values());
      }
      worst_layer = std::max(worst_layer, worst_fd_error(params, gviews, objective, checked, skipped));
    }

    // End to end: two layers, rectifier, head, softmax cross-entropy.
    {
      stgc::ModelConfig cfg;
      cfg.K1 = pick(rng, 1, 3);
      cfg.K2 = pick(rng, 1, 3);
      cfg.widths = {pick(rng, 2, 4), pick(rng, 2, 4)};
      cfg.input_dim = 3;
      cfg.n_classes = 3;
      cfg.head_input = inst % 2 ? stgc::HeadInput::mean_over_t : stgc::HeadInput::last;
      stgc::DeepSTGC net = stgc::DeepSTGC::create(cfg, n, rng);
      stgc::SignalSequence xs;
      for (std::size_t t = 0; t < T; ++t) xs.push_back(oracle::to_matrix(oracle::random_dense(n, 3, rng)));
      const std::size_t label = pick(rng, 0, 2);
      stgc::LossAndGrads lg = stgc::loss_and_grads(net, g, xs, label);
      auto params = stgc::parameter_blocks(net);
      auto gblocks = stgc::gradient_blocks(lg.grads);
      std::vector<std::span<const double>> gviews(gblocks.begin(), gblocks.end());
      const auto loss = [&] { return stgc::loss_and_grads(net, g, xs, label).loss; };
      const auto active = [&] {
        const stgc::DeepForward fwd = stgc::forward_deep_trace(g, net, xs);
        std::vector<bool> on;
        for (std::size_t l = 0; l + 1 < fwd.traces.size(); ++l)
          for (const Matrix& o : fwd.traces[l].output)
            for (double v : o.values()) on.push_back(v > 0.0);
        return on;
      };
      worst_model = std::max(worst_model, worst_fd_error(params, gviews, loss, checked, skipped, active));
    }
  }
  const double secs = sw.seconds();
  Outcome o{5, "BPTT gradients match central differences (layer and two-layer network)"};
  o.passed = worst_layer <= 1e-4 && worst_model <= 1e-4 && skipped * 100 <= checked && secs < 60.0;
  o.detail = "max elementwise rel err: layer " + sci(worst_layer) + ", network " + sci(worst_model) +
             " (limit 1e-4, " + std::to_string(checked) + " entries; " + std::to_string(skipped) +
             " skipped with a rectifier kink inside the stencil, at most 1% allowed; < 60 s)";
  o.seconds = secs;
  return o;
}

// Postconditions of the stability projection, checked from scratch.
bool projected_ok(const FilterBank& b, double eps) {
  double total = 0.0;
  for (std::size_t k = 0; k < b.K1; ++k) {
    const Dense w = oracle::to_dense(b.dense_w(k));
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i][i] < 0.0) return false;
    total += oracle::row_sum_norm(w);
  }
  return total <= 1.0 - eps;
}

struct TrainingAudit {
  std::size_t epochs = 0;
  std::size_t updates = 0;
  std::size_t step_violations = 0;
  std::size_t epoch_violations = 0;
};

Outcome criterion6(const TrainingAudit& audit) {
  Stopwatch sw;
  std::mt19937_64 rng(606);
  std::size_t not_idempotent = 0;
  std::size_t post_fail = 0;
  const std::size_t total = 200;
  for (std::size_t i = 0; i < total; ++i) {
    const SignalMode mode = i % 2 ? SignalMode::independent : SignalMode::dependent;
    const std::size_t d_in = pick(rng, 1, 5);
    const std::size_t d_out = mode == SignalMode::independent ? d_in : pick(rng, 1, 5);
    const double eps = pick_of<double>(rng, {1e-3, 1e-2, 0.1});
    FilterBank b = FilterBank::zeros(mode, pick(rng, 1, 4), pick(rng, 1, 4), d_in, d_out);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (Matrix& w : b.W)
      for (double& x : w.values()) x = u(rng);
    const FilterBank once = stgc::project_stable(b, eps);
    if (!(stgc::project_stable(once, eps) == once)) ++not_idempotent;
    if (!projected_ok(once, eps)) ++post_fail;
  }
  Outcome o{6, "stability projection idempotent; constraints hold after every training update"};
  o.passed = not_idempotent == 0 && post_fail == 0 && audit.epochs > 0 && audit.step_violations == 0 &&
             audit.epoch_violations == 0;
  std::ostringstream d;
  d << "random banks: " << total - not_idempotent << "/" << total << " idempotent, " << total - post_fail
    << "/" << total << " satisfy postconditions; training: " << audit.updates << " updates over "
    << audit.epochs << " epochs, " << audit.step_violations << " per-update violations, "
    << audit.epoch_violations << " epoch-end audit failures";
  o.detail = d.str();
  o.seconds = sw.seconds();
  return o;
}

double nearest_neighbour_accuracy(const stgc::Dataset& ds) {
  std::vector<stgc::SkeletonSequence> train, test;
  for (const auto& s : ds.subset(stgc::Split::train)) train.push_back(stgc::center_orthocenter(s));
  for (const auto& s : ds.subset(stgc::Split::test)) test.push_back(stgc::center_orthocenter(s));
  std::size_t correct = 0;
  for (const auto& q : test) {
    double best = 1e300;
    std::size_t label = 0;
    for (const auto& r : train) {
      double dist = 0.0;
      for (std::size_t i = 0; i < q.coords.size(); ++i) dist += (q.coords[i] - r.coords[i]) * (q.coords[i] - r.coords[i]);
      if (dist < best) {
        best = dist;
        label = r.label;
      }
    }
    correct += label == q.label;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

Outcome criterion7(TrainingAudit& audit) {
  Stopwatch sw;
  stgc::SynthSpec spec;  // 4 classes, 15 joints, 12 frames, noise 0.02, 75 per class
  std::mt19937_64 data_rng(7);
  const stgc::Dataset ds = stgc::synth_dataset(spec, data_rng);
  const std::size_t n_train = ds.subset(stgc::Split::train).size();
  const std::size_t n_test = ds.subset(stgc::Split::test).size();
  const double nn = nearest_neighbour_accuracy(ds);

  stgc::ModelConfig mc;  // widths 32/64, K1 = 2, K2 = 6
  mc.n_classes = ds.n_classes();
  stgc::TrainConfig tc;
  tc.epochs = 80;
  tc.aug_copies = 2;
  tc.eval_every = 10;
  std::mt19937_64 init_rng(1);
  stgc::DeepSTGC net = stgc::DeepSTGC::create(mc, spec.n_joints, init_rng, tc.epsilon);

  const auto result = stgc::train(std::move(net), ds, tc, [&](const stgc::EpochRecord& r, const stgc::DeepSTGC& m) {
    ++audit.epochs;
    audit.updates += r.updates;
    audit.step_violations += r.constraint_violations;
    for (const FilterBank& layer : m.layers)
      if (!projected_ok(layer, tc.epsilon)) {
        ++audit.epoch_violations;
        break;
      }
  });
  const double acc = stgc::evaluate(result.net, ds.subset(stgc::Split::test), tc.segments).accuracy;
  const double secs = sw.seconds();
  Outcome o{7, "two-layer Deep STGC (32/64, K1=2, K2=6) on the 4-class synthetic set"};
  o.passed = mc.widths == std::vector<std::size_t>{32, 64} && mc.K1 == 2 && mc.K2 == 6 && n_train == 200 &&
             n_test == 100 && result.history.size() <= 200 && acc >= 0.95 && nn >= 0.95 && secs < 300.0;
  std::ostringstream d;
  d << "test accuracy " << acc << " >= 0.95 after " << result.history.size() << " epochs (" << n_train
    << " train / " << n_test << " test, kernels " << stgc::kernels::active().name
    << "); nearest-neighbour baseline " << nn << "; < 300 s";
  o.detail = d.str();
  o.seconds = secs;
  return o;
}

Outcome criterion8() {
  Stopwatch sw;
  std::mt19937_64 rng(808);
  std::vector<std::string> failures;

  // ψ_0 = I.
  std::vector<Dense> graphs{oracle::to_dense(stgc::build_from_bones(25, stgc::ntu_bones()).adjacency())};
  for (int i = 0; i < 10; ++i) graphs.push_back(oracle::random_adjacency(pick(rng, 1, 12), rng, 0.3));
  for (const Dense& adj : graphs) {
    const stgc::StaticGraph g = graph_of(adj);
    if (!(g.psi(0) == Matrix::identity(adj.size()))) failures.push_back("psi_0 != I");
  }

  // k-hop locality against BFS distances.
  std::size_t locality_checks = 0;
  for (const Dense& adj : graphs) {
    const stgc::StaticGraph g = graph_of(adj);
    const auto dist = oracle::hop_distances(adj);
    for (std::size_t k = 0; k <= 6; ++k) {
      const Matrix& p = g.psi(k);
      for (std::size_t i = 0; i < adj.size(); ++i)
        for (std::size_t j = 0; j < adj.size(); ++j) {
          ++locality_checks;
          if (dist[i][j] > k && p(i, j) != 0.0) failures.push_back("psi_k nonzero beyond k hops");
          if (dist[i][j] == k && p(i, j) == 0.0) failures.push_back("psi_k zero at exactly k hops");
        }
    }
  }

  // Permutation equivariance of layer forward passes.
  double worst_perm = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = pick(rng, 2, 10);
    const Dense adj = oracle::random_adjacency(n, rng);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Dense padj = oracle::zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) padj[perm[i]][perm[j]] = adj[i][j];
    const SignalMode mode = inst % 2 ? SignalMode::independent : SignalMode::dependent;
    const std::size_t d = pick(rng, 1, 3);
    const FilterBank bank = random_bank(mode, 2, 3, d, mode == SignalMode::independent ? d : 2, rng, 0.6, 1.0);
    stgc::SignalSequence xs, pxs;
    for (int t = 0; t < 4; ++t) {
      const Dense x = oracle::random_dense(n, d, rng);
      Dense px = x;
      for (std::size_t i = 0; i < n; ++i) px[perm[i]] = x[i];
      xs.push_back(oracle::to_matrix(x));
      pxs.push_back(oracle::to_matrix(px));
    }
    const auto out = stgc::forward(graph_of(adj), bank, xs).output;
    const auto pout = stgc::forward(graph_of(padj), bank, pxs).output;
    for (std::size_t t = 0; t < out.size(); ++t) {
      Dense want = oracle::to_dense(out[t]);
      Dense permuted = want;
      for (std::size_t i = 0; i < n; ++i) permuted[perm[i]] = want[i];
      worst_perm = std::max(worst_perm, oracle::frob_diff(oracle::to_dense(pout[t]), permuted) /
                                            std::max(1.0, oracle::frob(permuted)));
    }
  }
  if (worst_perm > 1e-12) failures.push_back("permutation equivariance error " + sci(worst_perm));

  // Centering idempotence and dataset round trip.
  stgc::SynthSpec spec;
  spec.n_per_class = 10;
  std::mt19937_64 data_rng(9);
  const stgc::Dataset ds = stgc::synth_dataset(spec, data_rng);
  double worst_center = 0.0;
  for (const auto& s : ds.sequences) {
    const auto once = stgc::center_orthocenter(s);
    const auto twice = stgc::center_orthocenter(once);
    for (std::size_t i = 0; i < once.coords.size(); ++i)
      worst_center = std::max(worst_center, std::abs(once.coords[i] - twice.coords[i]));
  }
  if (worst_center > 1e-12) failures.push_back("centering not idempotent");
  const auto path = std::filesystem::temp_directory_path() / ("stgc_acceptance_" + std::to_string(::getpid()) + ".ds");
  stgc::save_dataset(ds, path);
  const stgc::Dataset back = stgc::load_dataset(path);
  std::filesystem::remove(path);
  if (!(back == ds) || stgc::encode_dataset(back) != stgc::encode_dataset(ds))
    failures.push_back("dataset round trip not bitwise identical");

  const double secs = sw.seconds();
  Outcome o{8, "structural invariants (psi_0, locality, equivariance, centering, file round trip)"};
  o.passed = failures.empty() && secs < 10.0;
  std::ostringstream d;
  if (failures.empty())
    d << "psi_0 = I on " << graphs.size() << " graphs; " << locality_checks
      << " locality entries match BFS; equivariance err " << sci(worst_perm) << "; centering drift "
      << sci(worst_center) << "; round trip bitwise; < 10 s";
  else
    d << failures.size() << " failures, first: " << failures.front();
  o.detail = d.str();
  o.seconds = secs;
  return o;
}

}  // namespace

int main() {
  std::vector<Outcome> outcomes;
  const auto stability = criterion2_instances();
  TrainingAudit audit;
  outcomes.push_back(criterion1());
  outcomes.push_back(criterion2(stability));
  outcomes.push_back(criterion3());
  outcomes.push_back(criterion4(stability));
  outcomes.push_back(criterion5());
  Outcome c7 = criterion7(audit);
  outcomes.push_back(criterion6(audit));
  outcomes.push_back(std::move(c7));
  outcomes.push_back(criterion8());

  bool all = true;
  for (const Outcome& o : outcomes) {
    all = all && o.passed;
    std::printf("%s  criterion %d  %s  [%.2f s]\n      %s\n", o.passed ? "PASS" : "FAIL", o.id, o.title.c_str(),
                o.seconds, o.detail.c_str());
  }
  std::printf("%s\n", all ? "all acceptance criteria passed" : "some acceptance criteria FAILED");
  return all ? 0 : 1;
}
