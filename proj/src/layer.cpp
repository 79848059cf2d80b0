#include "stgc/layer.hpp"

#include <cmath>
#include <string>

#include "byte_io.hpp"
#include "stgc/errors.hpp"
#include "stgc/kernels.hpp"

namespace stgc {
namespace {

bool is_indep(const FilterBank& bank) { return bank.mode == SignalMode::independent; }

// C += A * diag(s) where s is a 1 x cols row.
void add_scaled_cols(const Matrix& a, const Matrix& s, Matrix& c) {
  kernels::active().scale_cols_acc(a.rows(), a.cols(), a.data(), a.cols(), s.data(), c.data(),
                                   c.cols());
}

void check_inputs(const StaticGraph& graph, const FilterBank& bank, const SignalSequence& inputs) {
  bank.validate();
  if (inputs.empty()) throw DimensionError("signal sequence is empty");
  for (std::size_t t = 0; t < inputs.size(); ++t)
    if (inputs[t].rows() != graph.n_nodes() || inputs[t].cols() != bank.d_in)
      throw DimensionError("input frame " + std::to_string(t) + " is " +
                           std::to_string(inputs[t].rows()) + "x" + std::to_string(inputs[t].cols()) +
                           ", expected " + std::to_string(graph.n_nodes()) + "x" +
                           std::to_string(bank.d_in));
}

std::vector<Matrix> collect_fields(const StaticGraph& graph, const FilterBank& bank) {
  std::vector<Matrix> fields;
  const std::size_t count = std::max(bank.K1, bank.K2);
  fields.reserve(count);
  for (std::size_t k = 0; k < count; ++k) fields.push_back(graph.psi(k));
  return fields;
}

StepResult step_impl(std::span<const Matrix> psi, const FilterBank& bank, const Matrix& hidden,
                     const Matrix& input) {
  const std::size_t n = input.rows();
  StepResult r{Matrix(n, bank.d_out), Matrix()};
  Matrix tmp(n, bank.d_out);
  if (is_indep(bank)) {
    add_scaled_cols(input, bank.V[0], r.hidden);
    add_scaled_cols(hidden, bank.W[0], r.hidden);
    for (std::size_t k = 1; k < bank.K1; ++k) {
      gemm(psi[k], false, hidden, false, 1.0, 0.0, tmp);
      add_scaled_cols(tmp, bank.W[k], r.hidden);
    }
    r.output = r.hidden;
    for (std::size_t k = 1; k < bank.K2; ++k) {
      gemm(psi[k], false, input, false, 1.0, 0.0, tmp);
      add_scaled_cols(tmp, bank.V[k], r.output);
    }
    return r;
  }

  gemm(input, false, bank.V[0], false, 1.0, 0.0, r.hidden);
  gemm(hidden, false, bank.W[0], false, 1.0, 1.0, r.hidden);
  for (std::size_t k = 1; k < bank.K1; ++k) {
    gemm(psi[k], false, hidden, false, 1.0, 0.0, tmp);
    gemm(tmp, false, bank.W[k], false, 1.0, 1.0, r.hidden);
  }
  r.output = r.hidden;
  Matrix spatial(n, bank.d_in);
  for (std::size_t k = 1; k < bank.K2; ++k) {
    gemm(psi[k], false, input, false, 1.0, 0.0, spatial);
    gemm(spatial, false, bank.V[k], false, 1.0, 1.0, r.output);
  }
  return r;
}

LayerTrace run(const StaticGraph& graph, const FilterBank& bank, const SignalSequence& inputs) {
  check_inputs(graph, bank, inputs);
  LayerTrace trace;
  trace.mode = bank.mode;
  trace.inputs = inputs;
  trace.receptive_fields = collect_fields(graph, bank);
  trace.hidden.reserve(inputs.size() + 1);
  trace.output.reserve(inputs.size());
  trace.hidden.emplace_back(graph.n_nodes(), bank.d_out);
  for (const Matrix& x : inputs) {
    StepResult s = step_impl(trace.receptive_fields, bank, trace.hidden.back(), x);
    trace.hidden.push_back(std::move(s.hidden));
    trace.output.push_back(std::move(s.output));
  }
  return trace;
}

Matrix diagonal_row(const Matrix& m) {
  Matrix row(1, m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) row(0, i) = m(i, i);
  return row;
}

}  // namespace

FilterBank FilterBank::zeros(SignalMode mode, std::size_t K1, std::size_t K2, std::size_t d_in,
                             std::size_t d_out) {
  FilterBank b;
  b.mode = mode;
  b.K1 = K1;
  b.K2 = K2;
  b.d_in = d_in;
  b.d_out = d_out;
  if (mode == SignalMode::independent) {
    b.W.assign(K1, Matrix(1, d_out));
    b.V.assign(K2, Matrix(1, d_out));
  } else {
    b.W.assign(K1, Matrix(d_out, d_out));
    b.V.assign(K2, Matrix(d_in, d_out));
  }
  b.validate();
  return b;
}

FilterBank FilterBank::random(SignalMode mode, std::size_t K1, std::size_t K2, std::size_t d_in,
                              std::size_t d_out, std::mt19937_64& rng, double epsilon) {
  FilterBank b = zeros(mode, K1, K2, d_in, d_out);
  const double sw = 1.0 / static_cast<double>(K1 * d_out);
  const double sv = std::sqrt(6.0 / static_cast<double>(K2 * (d_in + d_out)));
  std::uniform_real_distribution<double> uw(-sw, sw);
  std::uniform_real_distribution<double> uv(-sv, sv);
  for (Matrix& w : b.W)
    for (double& x : w.values()) x = uw(rng);
  for (Matrix& v : b.V)
    for (double& x : v.values()) x = uv(rng);
  return project_stable(b, epsilon);
}

void FilterBank::validate() const {
  if (K1 < 1 || K2 < 1) throw DimensionError("filter bank needs K1 >= 1 and K2 >= 1");
  if (K1 > kCachedOrders || K2 > kCachedOrders)
    throw DimensionError("filter bank scale count exceeds " + std::to_string(kCachedOrders));
  if (d_in < 1 || d_out < 1) throw DimensionError("filter bank widths must be positive");
  if (W.size() != K1 || V.size() != K2)
    throw DimensionError("filter bank holds " + std::to_string(W.size()) + " W and " +
                         std::to_string(V.size()) + " V matrices, expected " +
                         std::to_string(K1) + " and " + std::to_string(K2));
  if (mode == SignalMode::independent) {
    if (d_in != d_out) throw DimensionError("independent mode requires d_in == d_out");
    for (const Matrix& m : W)
      if (m.rows() != 1 || m.cols() != d_out) throw DimensionError("independent W_k must be 1 x d");
    for (const Matrix& m : V)
      if (m.rows() != 1 || m.cols() != d_out) throw DimensionError("independent V_k must be 1 x d");
    return;
  }
  for (const Matrix& m : W)
    if (m.rows() != d_out || m.cols() != d_out) throw DimensionError("W_k must be d_out x d_out");
  for (const Matrix& m : V)
    if (m.rows() != d_in || m.cols() != d_out) throw DimensionError("V_k must be d_in x d_out");
}

Matrix FilterBank::dense_w(std::size_t k) const {
  return mode == SignalMode::independent ? Matrix::diagonal(W.at(k).values()) : W.at(k);
}

Matrix FilterBank::dense_v(std::size_t k) const {
  return mode == SignalMode::independent ? Matrix::diagonal(V.at(k).values()) : V.at(k);
}

FilterBank FilterBank::to_dependent() const {
  FilterBank b = *this;
  b.mode = SignalMode::dependent;
  for (std::size_t k = 0; k < K1; ++k) b.W[k] = dense_w(k);
  for (std::size_t k = 0; k < K2; ++k) b.V[k] = dense_v(k);
  return b;
}

Matrix multiscale_conv(const StaticGraph& graph, const Matrix& signal,
                       std::span<const Matrix> mappings) {
  if (mappings.empty()) throw DimensionError("multiscale_conv needs at least one mapping");
  if (mappings.size() > kCachedOrders) throw DimensionError("multiscale_conv: too many scales");
  if (signal.rows() != graph.n_nodes())
    throw DimensionError("multiscale_conv: signal rows do not match node count");
  const std::size_t d_out = mappings.front().cols();
  Matrix out(signal.rows(), d_out);
  Matrix spatial(signal.rows(), signal.cols());
  for (std::size_t k = 0; k < mappings.size(); ++k) {
    if (mappings[k].rows() != signal.cols() || mappings[k].cols() != d_out)
      throw DimensionError("multiscale_conv: mapping " + std::to_string(k) + " has wrong shape");
    if (k == 0) {
      gemm(signal, false, mappings[0], false, 1.0, 1.0, out);
      continue;
    }
    gemm(graph.psi(k), false, signal, false, 1.0, 0.0, spatial);
    gemm(spatial, false, mappings[k], false, 1.0, 1.0, out);
  }
  return out;
}

StepResult forward_step(const StaticGraph& graph, const FilterBank& bank, const Matrix& hidden,
                        const Matrix& input) {
  check_inputs(graph, bank, SignalSequence{input});
  if (hidden.rows() != graph.n_nodes() || hidden.cols() != bank.d_out)
    throw DimensionError("forward_step: hidden state has wrong shape");
  const std::vector<Matrix> fields = collect_fields(graph, bank);
  return step_impl(fields, bank, hidden, input);
}

LayerTrace forward_dep(const StaticGraph& graph, const FilterBank& bank,
                       const SignalSequence& inputs) {
  if (bank.mode != SignalMode::dependent) throw DimensionError("forward_dep needs a dependent bank");
  return run(graph, bank, inputs);
}

LayerTrace forward_indep(const StaticGraph& graph, const FilterBank& bank,
                         const SignalSequence& inputs) {
  if (bank.mode != SignalMode::independent)
    throw DimensionError("forward_indep needs an independent bank");
  return run(graph, bank, inputs);
}

LayerTrace forward(const StaticGraph& graph, const FilterBank& bank, const SignalSequence& inputs) {
  return run(graph, bank, inputs);
}

LayerGradients backward(const LayerTrace& trace, const FilterBank& bank,
                        const SignalSequence& output_grads) {
  bank.validate();
  const std::size_t steps = trace.steps();
  if (trace.mode != bank.mode) throw DimensionError("backward: trace and bank modes differ");
  if (steps == 0 || trace.hidden.size() != steps + 1 || trace.inputs.size() != steps)
    throw DimensionError("backward: trace is incomplete");
  if (trace.receptive_fields.size() < std::max(bank.K1, bank.K2))
    throw DimensionError("backward: trace was recorded with fewer scales than the bank");
  if (output_grads.size() != steps) throw DimensionError("backward: gradient count != steps");
  const std::size_t n = trace.inputs.front().rows();
  if (trace.inputs.front().cols() != bank.d_in || trace.hidden.back().cols() != bank.d_out)
    throw DimensionError("backward: trace widths do not match the bank");
  for (const Matrix& g : output_grads)
    if (g.rows() != n || g.cols() != bank.d_out)
      throw DimensionError("backward: output gradient has wrong shape");

  const FilterBank dense = is_indep(bank) ? bank.to_dependent() : bank;
  const auto& psi = trace.receptive_fields;

  LayerGradients g;
  g.dW.assign(bank.K1, Matrix(bank.d_out, bank.d_out));
  g.dV.assign(bank.K2, Matrix(bank.d_in, bank.d_out));
  g.dX.assign(steps, Matrix(n, bank.d_in));

  Matrix carry(n, bank.d_out);
  Matrix hidden_grad(n, bank.d_out);
  Matrix field_y(n, bank.d_out);
  Matrix field_x(n, bank.d_in);
  Matrix mapped_y(n, bank.d_out);
  Matrix mapped_x(n, bank.d_in);
  for (std::size_t t = steps; t-- > 0;) {
    const Matrix& go = output_grads[t];
    const Matrix& x = trace.inputs[t];
    const Matrix& y_prev = trace.hidden[t];
    hidden_grad = go;
    hidden_grad += carry;

    gemm(y_prev, true, hidden_grad, false, 1.0, 1.0, g.dW[0]);
    for (std::size_t k = 1; k < bank.K1; ++k) {
      gemm(psi[k], false, y_prev, false, 1.0, 0.0, field_y);
      gemm(field_y, true, hidden_grad, false, 1.0, 1.0, g.dW[k]);
    }
    gemm(x, true, hidden_grad, false, 1.0, 1.0, g.dV[0]);
    gemm(hidden_grad, false, dense.V[0], true, 1.0, 1.0, g.dX[t]);

    for (std::size_t k = 1; k < bank.K2; ++k) {
      gemm(psi[k], false, x, false, 1.0, 0.0, field_x);
      gemm(field_x, true, go, false, 1.0, 1.0, g.dV[k]);
      gemm(go, false, dense.V[k], true, 1.0, 0.0, mapped_x);
      gemm(psi[k], true, mapped_x, false, 1.0, 1.0, g.dX[t]);
    }

    if (t == 0) break;
    gemm(hidden_grad, false, dense.W[0], true, 1.0, 0.0, carry);
    for (std::size_t k = 1; k < bank.K1; ++k) {
      gemm(hidden_grad, false, dense.W[k], true, 1.0, 0.0, mapped_y);
      gemm(psi[k], true, mapped_y, false, 1.0, 1.0, carry);
    }
  }

  if (is_indep(bank)) {
    for (Matrix& m : g.dW) m = diagonal_row(m);
    for (Matrix& m : g.dV) m = diagonal_row(m);
  }
  return g;
}

double temporal_norm_sum(const FilterBank& bank) {
  double s = 0.0;
  for (const Matrix& w : bank.W) s += is_indep(bank) ? max_abs(w) : inf_norm(w);
  return s;
}

bool satisfies_stability_constraints(const FilterBank& bank, double epsilon) {
  for (const Matrix& w : bank.W) {
    if (is_indep(bank)) {
      for (double v : w.values())
        if (v < 0.0) return false;
    } else {
      for (std::size_t i = 0; i < w.rows(); ++i)
        if (w(i, i) < 0.0) return false;
    }
  }
  return temporal_norm_sum(bank) <= 1.0 - epsilon;
}

FilterBank project_stable(const FilterBank& bank, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
  bank.validate();
  FilterBank out = bank;
  for (Matrix& w : out.W) {
    if (is_indep(out)) {
      for (double& v : w.values())
        if (v < 0.0) v = 0.0;
    } else {
      for (std::size_t i = 0; i < w.rows(); ++i)
        if (w(i, i) < 0.0) w(i, i) = 0.0;
    }
  }

  const double limit = 1.0 - epsilon;
  const double total = temporal_norm_sum(out);
  if (total <= limit) return out;

  const std::vector<Matrix> clipped = out.W;
  double factor = limit / total;
  for (;;) {
    for (std::size_t k = 0; k < out.W.size(); ++k) {
      out.W[k] = clipped[k];
      out.W[k] *= factor;
    }
    if (temporal_norm_sum(out) <= limit) return out;
    factor = std::nextafter(factor, 0.0);
  }
}

std::vector<std::uint8_t> serialize(const FilterBank& bank) {
  bank.validate();
  if (bank.K1 > 0xFFFF || bank.K2 > 0xFFFF || bank.d_in > 0xFFFF || bank.d_out > 0xFFFF)
    throw DimensionError("filter bank dimensions do not fit the u16 header fields");
  std::vector<std::uint8_t> out;
  detail::ByteWriter w(out);
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("STGC"), 4));
  w.put<std::uint32_t>(kFilterBankVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(bank.mode));
  w.put<std::uint8_t>(0);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(bank.K1));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(bank.K2));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(bank.d_in));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(bank.d_out));
  for (int i = 0; i < 6; ++i) w.put<std::uint8_t>(0);
  for (const Matrix& m : bank.W) w.put_doubles(m.values());
  for (const Matrix& m : bank.V) w.put_doubles(m.values());
  return out;
}

FilterBank deserialize_filter_bank(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  const auto magic = r.get_bytes(4, "filter bank magic");
  if (std::string(magic.begin(), magic.end()) != "STGC")
    throw FormatError("filter bank: bad magic", 0);
  const auto version = r.get<std::uint32_t>("filter bank version");
  if (version != kFilterBankVersion)
    throw FormatError("filter bank: unsupported version " + std::to_string(version), 4);
  const auto mode = r.get<std::uint8_t>("filter bank mode");
  if (mode > 1) throw FormatError("filter bank: unknown mode " + std::to_string(mode), 8);
  r.skip(1, "filter bank header padding");
  const std::size_t K1 = r.get<std::uint16_t>("K1");
  const std::size_t K2 = r.get<std::uint16_t>("K2");
  const std::size_t d_in = r.get<std::uint16_t>("d_in");
  const std::size_t d_out = r.get<std::uint16_t>("d_out");
  r.skip(6, "filter bank header padding");

  FilterBank b;
  try {
    b = FilterBank::zeros(static_cast<SignalMode>(mode), K1, K2, d_in, d_out);
  } catch (const DimensionError& e) {
    throw FormatError(std::string("filter bank: ") + e.what(), 10);
  }
  for (Matrix& m : b.W) r.get_doubles(m.values(), "W values");
  for (Matrix& m : b.V) r.get_doubles(m.values(), "V values");
  if (r.remaining() != 0) throw FormatError("filter bank: trailing bytes", r.position());
  return b;
}

}  // namespace stgc
