#include "stgc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "stgc/errors.hpp"
#include "stgc/model.hpp"
#include "stgc/spectral.hpp"
#include "stgc/stability.hpp"

namespace stgc {
namespace {

constexpr double kFdStep = 1e-5;

double layer_objective(const StaticGraph& g, const FilterBank& bank, const SignalSequence& xs,
                       const SignalSequence& weights) {
  const LayerTrace tr = forward(g, bank, xs);
  double s = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t)
    for (std::size_t i = 0; i < weights[t].size(); ++i)
      s += weights[t].data()[i] * tr.output[t].data()[i];
  return s;
}

template <class Eval>
double central_difference(double& param, Eval&& eval) {
  const double saved = param;
  param = saved + kFdStep;
  const double up = eval();
  param = saved - kFdStep;
  const double down = eval();
  param = saved;
  return (up - down) / (2.0 * kFdStep);
}

CheckResult make(const char* suite, const char* name, double value, double threshold,
                 bool strict_less = false, std::string detail = {}) {
  CheckResult r;
  r.suite = suite;
  r.name = name;
  r.value = value;
  r.threshold = threshold;
  r.passed = strict_less ? value < threshold : value <= threshold;
  r.detail = std::move(detail);
  return r;
}

void spectral_suite(std::mt19937_64& rng, std::vector<CheckResult>& out) {
  double worst_equiv = 0.0;
  double worst_recon = 0.0;
  double worst_roundtrip = 0.0;
  const std::size_t sizes[] = {4, 8, 16};
  const std::size_t scales[] = {1, 2, 4};
  const std::size_t dins[] = {1, 3};
  const std::size_t douts[] = {1, 4};
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = sizes[inst % 3];
    const std::size_t K = scales[(inst / 3) % 3];
    const std::size_t d = dins[(inst / 9) % 2];
    const std::size_t dp = douts[(inst / 18) % 2];
    const StaticGraph g = random_graph(n, rng);
    const SpectralDecomposition dec = eigendecompose(g.laplacian_scaled());
    worst_recon = std::max(worst_recon, dec.reconstruction_error);
    std::vector<Matrix> vs;
    for (std::size_t k = 0; k < K; ++k) vs.push_back(random_matrix(d, dp, rng));
    const Matrix x = random_matrix(n, d, rng);
    const Matrix spatial = multiscale_conv(g, x, vs);
    const Matrix spectral = igft(dec, frequency_response(dec, vs, gft(dec, x)));
    worst_equiv = std::max(worst_equiv, frobenius_norm(spatial - spectral) /
                                            std::max(1e-300, frobenius_norm(spatial)));
    worst_roundtrip = std::max(worst_roundtrip, frobenius_norm(igft(dec, gft(dec, x)) - x));
  }
  out.push_back(make("spectral", "spatial vs frequency-domain filtering (50 instances)",
                     worst_equiv, 1e-8));
  out.push_back(make("spectral", "eigendecomposition reconstruction", worst_recon, 1e-8));
  out.push_back(make("spectral", "gft/igft round trip", worst_roundtrip, 1e-10));
}

void stability_suite(std::mt19937_64& rng, std::vector<CheckResult>& out) {
  double worst_resid = 0.0;
  double worst_bound_gap = -1e300;  // ‖T‖ - bound, must stay < 0
  double worst_gamma = 0.0;
  double worst_sbdd = 1e300;
  std::size_t worst_steps = 0;
  double worst_indep_resid = 0.0;
  double worst_mode_gap = 0.0;
  bool idempotent = true;
  std::uniform_int_distribution<std::size_t> nd(2, 8), dd(1, 3), k1d(1, 3), k2d(1, 4);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = nd(rng);
    const std::size_t d = dd(rng);
    const std::size_t dp = dd(rng);
    const std::size_t K1 = k1d(rng);
    const std::size_t K2 = k2d(rng);
    const StaticGraph g = random_graph(n, rng);
    const FilterBank bank = random_projected_bank(SignalMode::dependent, K1, K2, d, dp, rng);
    idempotent = idempotent && project_stable(bank) == bank;
    const SpectralDecomposition dec = graph_spectrum(g);
    const LimitOperator op = limit_operator(dec, bank);
    worst_bound_gap = std::max(worst_bound_gap, op.spectral_norm - op.upper_bound);
    const Matrix x = random_matrix(n, d, rng);
    try {
      const ConvergenceReport rep = empirical_converge(g, bank, x, 1e-6, 500);
      worst_resid = std::max(worst_resid, rep.residual);
      worst_steps = std::max(worst_steps, rep.steps);
    } catch (const ConvergenceError& e) {
      worst_resid = std::max(worst_resid, e.residual());
    }
    std::vector<Matrix> ws(bank.W.begin(), bank.W.end());
    worst_gamma = std::max(worst_gamma, spectral_norm(gamma(ws, dec, 0, K1)));
    const SbddReport sb = check_sbdd(dec, bank);
    for (double m : sb.margins) worst_sbdd = std::min(worst_sbdd, m);

    const FilterBank ib = random_projected_bank(SignalMode::independent, K1, K2, d, d, rng);
    const Matrix xi = random_matrix(n, d, rng);
    try {
      worst_indep_resid =
          std::max(worst_indep_resid, empirical_converge(g, ib, xi, 1e-6, 500).residual);
    } catch (const ConvergenceError& e) {
      worst_indep_resid = std::max(worst_indep_resid, e.residual());
    }
    const LimitOperator li = limit_operator_indep(dec, ib);
    const LimitOperator ld = limit_operator(dec, ib.to_dependent());
    Matrix embedded(n * d, n * d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < n; ++i) embedded(j * n + i, j * n + i) = li.transfer(i, j);
    worst_mode_gap = std::max(worst_mode_gap, max_abs(embedded - ld.transfer));
  }
  out.push_back(make("stability", "constant-input recursion reaches the limit operator",
                     worst_resid, 1e-6, false,
                     "slowest instance converged in " + std::to_string(worst_steps) + " steps"));
  out.push_back(make("stability", "||T||_2 - analytic bound (must be < 0)", worst_bound_gap, 0.0, true));
  out.push_back(make("stability", "||Gamma_0^K1(W)||_2 < 1", worst_gamma, 1.0, true));
  out.push_back(make("stability", "block dominance margin (negated, must be < 0)", -worst_sbdd, 0.0,
                     true));
  out.push_back(make("stability", "independent mode reaches its elementwise limit",
                     worst_indep_resid, 1e-6));
  out.push_back(make("stability", "independent vs dependent limit operator", worst_mode_gap, 1e-10));
  out.push_back(make("stability", "projection idempotent", idempotent ? 0.0 : 1.0, 0.0));
}

void gradient_suite(std::mt19937_64& rng, std::vector<CheckResult>& out) {
  double worst_layer = 0.0;
  double worst_model = 0.0;
  std::uniform_int_distribution<std::size_t> nd(2, 8), td(1, 6), dd(1, 4), kd(1, 3);
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = nd(rng);
    const std::size_t T = td(rng);
    const std::size_t d = dd(rng);
    const std::size_t dp = dd(rng);
    const SignalMode mode = inst % 3 == 2 ? SignalMode::independent : SignalMode::dependent;
    const std::size_t dout = mode == SignalMode::independent ? d : dp;
    const StaticGraph g = random_graph(n, rng);
    FilterBank bank = random_projected_bank(mode, kd(rng), kd(rng), d, dout, rng);
    SignalSequence xs;
    SignalSequence ws;
    for (std::size_t t = 0; t < T; ++t) {
      xs.push_back(random_matrix(n, d, rng));
      ws.push_back(random_matrix(n, dout, rng));
    }
    const LayerGradients lg = backward(forward(g, bank, xs), bank, ws);
    auto eval = [&] { return layer_objective(g, bank, xs, ws); };
    for (std::size_t k = 0; k < bank.K1; ++k)
      for (std::size_t i = 0; i < bank.W[k].size(); ++i)
        worst_layer = std::max(worst_layer, relative_error(lg.dW[k].data()[i],
                                                           central_difference(bank.W[k].data()[i], eval)));
    for (std::size_t k = 0; k < bank.K2; ++k)
      for (std::size_t i = 0; i < bank.V[k].size(); ++i)
        worst_layer = std::max(worst_layer, relative_error(lg.dV[k].data()[i],
                                                           central_difference(bank.V[k].data()[i], eval)));
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < xs[t].size(); ++i)
        worst_layer = std::max(worst_layer, relative_error(lg.dX[t].data()[i],
                                                           central_difference(xs[t].data()[i], eval)));
  }

  for (int inst = 0; inst < 3; ++inst) {
    const std::size_t n = nd(rng);
    const std::size_t T = td(rng);
    ModelConfig cfg;
    cfg.K1 = 2;
    cfg.K2 = 3;
    cfg.widths = {4, 5};
    cfg.n_classes = 3;
    cfg.head_input = inst == 1 ? HeadInput::mean_over_t : HeadInput::last;
    DeepSTGC net = DeepSTGC::create(cfg, n, rng);
    for (FilterBank& b : net.layers) b = random_projected_bank(b.mode, b.K1, b.K2, b.d_in, b.d_out, rng, 0.5);
    const StaticGraph g = random_graph(n, rng);
    SignalSequence xs;
    for (std::size_t t = 0; t < T; ++t) xs.push_back(random_matrix(n, 3, rng));
    const std::size_t label = static_cast<std::size_t>(inst) % cfg.n_classes;
    LossAndGrads lg = loss_and_grads(net, g, xs, label);
    auto params = parameter_blocks(net);
    auto grads = gradient_blocks(lg.grads);
    auto eval = [&] { return loss_and_grads(net, g, xs, label).loss; };
    for (std::size_t b = 0; b < params.size(); ++b)
      for (std::size_t i = 0; i < params[b].size(); ++i)
        worst_model = std::max(worst_model, relative_error(grads[b][i], central_difference(params[b][i], eval)));
  }
  out.push_back(make("gradients", "layer BPTT vs central differences", worst_layer, 1e-4));
  out.push_back(make("gradients", "two-layer model vs central differences", worst_model, 1e-4));
}

}  // namespace

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

StaticGraph random_graph(std::size_t n, std::mt19937_64& rng, double density) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng) < density) a(i, j) = a(j, i) = weight(rng);
  return StaticGraph(std::move(a));
}

FilterBank random_projected_bank(SignalMode mode, std::size_t K1, std::size_t K2, std::size_t d_in,
                                 std::size_t d_out, std::mt19937_64& rng, double scale,
                                 double epsilon) {
  FilterBank b = FilterBank::zeros(mode, K1, K2, d_in, d_out);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Matrix& w : b.W)
    for (double& v : w.values()) v = u(rng);
  for (Matrix& m : b.V)
    for (double& v : m.values()) v = u(rng);
  return project_stable(b, epsilon);
}

std::vector<CheckResult> run_verification(const std::string& suite, std::uint64_t seed) {
  if (suite != "all" && suite != "spectral" && suite != "stability" && suite != "gradients")
    throw std::invalid_argument("unknown suite \"" + suite + "\"");
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  if (suite == "all" || suite == "spectral") spectral_suite(rng, out);
  if (suite == "all" || suite == "stability") stability_suite(rng, out);
  if (suite == "all" || suite == "gradients") gradient_suite(rng, out);
  return out;
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "PASS" << std::setw(11) << "suite" << std::setw(56) << "check"
     << std::setw(14) << "value" << "limit\n";
  for (const CheckResult& r : results) {
    os << std::left << std::setw(6) << (r.passed ? "ok" : "FAIL") << std::setw(11) << r.suite
       << std::setw(56) << r.name << std::setw(14) << std::setprecision(4) << std::scientific
       << r.value << r.threshold << std::defaultfloat;
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << '\n';
  }
  return os.str();
}

nlohmann::json report_to_json(const std::vector<CheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& r : results)
    arr.push_back({{"suite", r.suite},
                   {"check", r.name},
                   {"passed", r.passed},
                   {"value", r.value},
                   {"threshold", r.threshold},
                   {"detail", r.detail}});
  return arr;
}

}  // namespace stgc
