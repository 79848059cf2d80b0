#include "stgc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "byte_io.hpp"
#include "stgc/errors.hpp"

namespace stgc {
namespace {

constexpr char kCheckpointMagic[8] = {'S', 'T', 'G', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix flatten_row(const Matrix& m) {
  Matrix out(1, m.size());
  std::copy(m.values().begin(), m.values().end(), out.values().begin());
  return out;
}

}  // namespace

std::string to_string(HeadInput h) { return h == HeadInput::last ? "last" : "mean_over_t"; }

HeadInput head_input_from_string(const std::string& s) {
  if (s == "last") return HeadInput::last;
  if (s == "mean_over_t") return HeadInput::mean_over_t;
  throw std::invalid_argument("head_input must be \"last\" or \"mean_over_t\", got \"" + s + "\"");
}

std::string to_string(SignalMode m) {
  return m == SignalMode::dependent ? "dependent" : "independent";
}

SignalMode signal_mode_from_string(const std::string& s) {
  if (s == "dependent") return SignalMode::dependent;
  if (s == "independent") return SignalMode::independent;
  throw std::invalid_argument("mode must be \"dependent\" or \"independent\", got \"" + s + "\"");
}

DeepSTGC DeepSTGC::create(const ModelConfig& config, std::size_t n_nodes, std::mt19937_64& rng,
                          double epsilon) {
  if (config.widths.empty()) throw DimensionError("model needs at least one layer");
  if (config.n_classes < 1) throw DimensionError("model needs at least one class");
  if (n_nodes < 1) throw DimensionError("model needs at least one node");
  DeepSTGC net;
  net.n_nodes = n_nodes;
  net.n_classes = config.n_classes;
  net.head_input = config.head_input;
  std::size_t d_in = config.input_dim;
  for (std::size_t width : config.widths) {
    if (config.mode == SignalMode::independent && width != d_in)
      throw DimensionError("independent layers keep their width; widths must equal input_dim");
    net.layers.push_back(FilterBank::random(config.mode, config.K1, config.K2, d_in, width, rng,
                                            epsilon));
    d_in = width;
  }
  const std::size_t features = net.feature_size();
  const double s = 1.0 / std::sqrt(static_cast<double>(features));
  std::uniform_real_distribution<double> u(-s, s);
  net.head = Matrix(features, config.n_classes);
  for (double& v : net.head.values()) v = u(rng);
  net.bias = Matrix(1, config.n_classes);
  return net;
}

void DeepSTGC::validate() const {
  if (layers.empty()) throw DimensionError("model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].d_in != layers[l - 1].d_out)
      throw DimensionError("layer " + std::to_string(l) + " input width does not chain");
  }
  if (head.rows() != feature_size() || head.cols() != n_classes)
    throw DimensionError("head must be (n_nodes * d_last) x n_classes");
  if (bias.rows() != 1 || bias.cols() != n_classes) throw DimensionError("bias must be 1 x n_classes");
}

std::size_t DeepSTGC::feature_size() const { return n_nodes * layers.back().d_out; }

ModelConfig DeepSTGC::config() const {
  ModelConfig c;
  c.mode = layers.front().mode;
  c.K1 = layers.front().K1;
  c.K2 = layers.front().K2;
  c.widths.clear();
  for (const FilterBank& b : layers) c.widths.push_back(b.d_out);
  c.input_dim = layers.front().d_in;
  c.n_classes = n_classes;
  c.head_input = head_input;
  return c;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

DeepForward forward_deep_trace(const StaticGraph& graph, const DeepSTGC& net,
                               const SignalSequence& inputs) {
  net.validate();
  if (graph.n_nodes() != net.n_nodes) throw DimensionError("graph node count differs from model");
  DeepForward out;
  out.traces.reserve(net.layers.size());
  const SignalSequence* current = &inputs;
  SignalSequence activated;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    out.traces.push_back(forward(graph, net.layers[l], *current));
    if (l + 1 < net.layers.size()) {
      activated.clear();
      for (const Matrix& o : out.traces.back().output) activated.push_back(relu(o));
      current = &activated;
    }
  }

  const std::vector<Matrix>& last = out.traces.back().output;
  if (net.head_input == HeadInput::last) {
    out.features = flatten_row(last.back());
  } else {
    Matrix mean = last.front();
    for (std::size_t t = 1; t < last.size(); ++t) mean += last[t];
    mean *= 1.0 / static_cast<double>(last.size());
    out.features = flatten_row(mean);
  }
  out.logits = net.bias;
  gemm(out.features, false, net.head, false, 1.0, 1.0, out.logits);
  out.probabilities = softmax(out.logits.values());
  return out;
}

std::vector<double> forward_deep(const StaticGraph& graph, const DeepSTGC& net,
                                 const SignalSequence& inputs) {
  return forward_deep_trace(graph, net, inputs).probabilities;
}

ModelGradients ModelGradients::zeros_like(const DeepSTGC& net) {
  ModelGradients g;
  for (const FilterBank& b : net.layers) {
    std::vector<Matrix> dw;
    std::vector<Matrix> dv;
    for (const Matrix& w : b.W) dw.emplace_back(w.rows(), w.cols());
    for (const Matrix& v : b.V) dv.emplace_back(v.rows(), v.cols());
    g.dW.push_back(std::move(dw));
    g.dV.push_back(std::move(dv));
  }
  g.head = Matrix(net.head.rows(), net.head.cols());
  g.bias = Matrix(net.bias.rows(), net.bias.cols());
  return g;
}

ModelGradients& ModelGradients::operator+=(const ModelGradients& other) {
  if (dW.size() != other.dW.size()) throw DimensionError("gradient sets have different depth");
  for (std::size_t l = 0; l < dW.size(); ++l) {
    for (std::size_t k = 0; k < dW[l].size(); ++k) dW[l][k] += other.dW[l][k];
    for (std::size_t k = 0; k < dV[l].size(); ++k) dV[l][k] += other.dV[l][k];
  }
  head += other.head;
  bias += other.bias;
  return *this;
}

ModelGradients& ModelGradients::operator*=(double s) {
  for (auto& layer : dW)
    for (Matrix& m : layer) m *= s;
  for (auto& layer : dV)
    for (Matrix& m : layer) m *= s;
  head *= s;
  bias *= s;
  return *this;
}

LossAndGrads loss_and_grads(const DeepSTGC& net, const StaticGraph& graph,
                            const SignalSequence& inputs, std::size_t label) {
  if (label >= net.n_classes)
    throw std::out_of_range("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(net.n_classes) + ")");
  DeepForward fwd = forward_deep_trace(graph, net, inputs);

  LossAndGrads r;
  r.probabilities = fwd.probabilities;
  r.loss = -std::log(fwd.probabilities[label]);
  r.grads = ModelGradients::zeros_like(net);

  Matrix dlogits(1, net.n_classes);
  for (std::size_t c = 0; c < net.n_classes; ++c)
    dlogits(0, c) = fwd.probabilities[c] - (c == label ? 1.0 : 0.0);
  r.grads.bias = dlogits;
  gemm(fwd.features, true, dlogits, false, 1.0, 0.0, r.grads.head);
  Matrix dfeatures(1, net.feature_size());
  gemm(dlogits, false, net.head, true, 1.0, 0.0, dfeatures);

  const std::size_t steps = inputs.size();
  const std::size_t d_last = net.layers.back().d_out;
  Matrix dlast(net.n_nodes, d_last);
  std::copy(dfeatures.values().begin(), dfeatures.values().end(), dlast.values().begin());
  SignalSequence grads(steps, Matrix(net.n_nodes, d_last));
  if (net.head_input == HeadInput::last) {
    grads.back() = dlast;
  } else {
    dlast *= 1.0 / static_cast<double>(steps);
    for (Matrix& g : grads) g = dlast;
  }

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    LayerGradients lg = backward(fwd.traces[l], net.layers[l], grads);
    r.grads.dW[l] = std::move(lg.dW);
    r.grads.dV[l] = std::move(lg.dV);
    if (l == 0) break;
    const std::vector<Matrix>& below = fwd.traces[l - 1].output;
    for (std::size_t t = 0; t < steps; ++t) {
      Matrix& g = lg.dX[t];
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(below[t].data()[i] > 0.0)) g.data()[i] = 0.0;
    }
    grads = std::move(lg.dX);
  }
  return r;
}

std::vector<std::span<double>> parameter_blocks(DeepSTGC& net) {
  std::vector<std::span<double>> blocks;
  for (FilterBank& b : net.layers) {
    for (Matrix& w : b.W) blocks.push_back(w.values());
    for (Matrix& v : b.V) blocks.push_back(v.values());
  }
  blocks.push_back(net.head.values());
  blocks.push_back(net.bias.values());
  return blocks;
}

std::vector<std::span<double>> gradient_blocks(ModelGradients& grads) {
  std::vector<std::span<double>> blocks;
  for (std::size_t l = 0; l < grads.dW.size(); ++l) {
    for (Matrix& w : grads.dW[l]) blocks.push_back(w.values());
    for (Matrix& v : grads.dV[l]) blocks.push_back(v.values());
  }
  blocks.push_back(grads.head.values());
  blocks.push_back(grads.bias.values());
  return blocks;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".json");
}

void save_checkpoint(const DeepSTGC& net, const std::filesystem::path& path) {
  net.validate();
  std::vector<std::uint8_t> bytes;
  detail::ByteWriter w(bytes);
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kCheckpointMagic),
                                            sizeof(kCheckpointMagic)));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(net.layers.size()));
  for (const FilterBank& b : net.layers) {
    const std::vector<std::uint8_t> blob = serialize(b);
    w.put<std::uint64_t>(blob.size());
    w.put_bytes(blob);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(net.head.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(net.head.cols()));
  w.put_doubles(net.head.values());
  w.put_doubles(net.bias.values());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

  const ModelConfig c = net.config();
  nlohmann::json meta = {{"format", "stgc-checkpoint"},
                         {"version", kCheckpointVersion},
                         {"mode", to_string(c.mode)},
                         {"K1", c.K1},
                         {"K2", c.K2},
                         {"widths", c.widths},
                         {"input_dim", c.input_dim},
                         {"n_nodes", net.n_nodes},
                         {"n_classes", c.n_classes},
                         {"head_input", to_string(c.head_input)}};
  std::ofstream side(sidecar_path(path));
  if (!side) throw std::runtime_error("cannot write checkpoint sidecar");
  side << meta.dump(2) << '\n';
}

DeepSTGC load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};

  std::ifstream side(sidecar_path(path));
  if (!side) throw std::runtime_error("missing checkpoint sidecar " + sidecar_path(path).string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(side);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint sidecar: ") + e.what(), 0);
  }

  detail::ByteReader r(bytes);
  const auto magic = r.get_bytes(sizeof(kCheckpointMagic), "checkpoint magic");
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic))
    throw FormatError("checkpoint: bad magic", 0);
  const auto version = r.get<std::uint32_t>("checkpoint version");
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version), 8);

  DeepSTGC net;
  const auto n_layers = r.get<std::uint32_t>("layer count");
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto len = r.get<std::uint64_t>("layer blob length");
    if (len > r.remaining()) throw FormatError("checkpoint: truncated layer blob", r.position());
    net.layers.push_back(deserialize_filter_bank(r.get_bytes(len, "layer blob")));
  }
  const std::size_t rows = r.get<std::uint32_t>("head rows");
  const std::size_t cols = r.get<std::uint32_t>("head cols");
  net.head = Matrix(rows, cols);
  r.get_doubles(net.head.values(), "head values");
  net.bias = Matrix(1, cols);
  r.get_doubles(net.bias.values(), "bias values");
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes", r.position());

  try {
    net.n_nodes = meta.at("n_nodes").get<std::size_t>();
    net.n_classes = meta.at("n_classes").get<std::size_t>();
    net.head_input = head_input_from_string(meta.at("head_input").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint sidecar: ") + e.what(), 0);
  }
  if (net.n_classes != cols) throw FormatError("checkpoint: sidecar n_classes disagrees", 0);
  try {
    net.validate();
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what(), 0);
  }
  return net;
}

}  // namespace stgc
