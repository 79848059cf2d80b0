#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stgc/graph.hpp"
#include "stgc/layer.hpp"
#include "stgc/matrix.hpp"

namespace stgc {

/// Which layer outputs feed the classifier: the final step O_T, or the
/// average of O_1..O_T.
enum class HeadInput { last, mean_over_t };

std::string to_string(HeadInput h);
HeadInput head_input_from_string(const std::string& s);
std::string to_string(SignalMode m);
SignalMode signal_mode_from_string(const std::string& s);

struct ModelConfig {
  SignalMode mode = SignalMode::dependent;
  std::size_t K1 = 2;
  std::size_t K2 = 6;
  std::vector<std::size_t> widths{32, 64};
  std::size_t input_dim = 3;
  std::size_t n_classes = 2;
  HeadInput head_input = HeadInput::last;
};

/// Stacked STGC layers with a rectifier between them and a softmax head on
/// the flattened (row-major, n * d_last) output of the last layer.
struct DeepSTGC {
  std::size_t n_nodes = 0;
  std::size_t n_classes = 0;
  HeadInput head_input = HeadInput::last;
  std::vector<FilterBank> layers;
  Matrix head;  // (n_nodes * d_last) x n_classes
  Matrix bias;  // 1 x n_classes

  /// Layers use FilterBank::random; head entries are uniform in ±1/sqrt(fan_in).
  static DeepSTGC create(const ModelConfig& config, std::size_t n_nodes, std::mt19937_64& rng,
                         double epsilon = kStabilityEpsilon);

  void validate() const;
  std::size_t feature_size() const;
  ModelConfig config() const;

  friend bool operator==(const DeepSTGC&, const DeepSTGC&) = default;
};

struct DeepForward {
  std::vector<LayerTrace> traces;
  Matrix features;  // 1 x feature_size
  Matrix logits;    // 1 x n_classes
  std::vector<double> probabilities;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

DeepForward forward_deep_trace(const StaticGraph& graph, const DeepSTGC& net,
                               const SignalSequence& inputs);

/// Class probabilities for one sequence.
std::vector<double> forward_deep(const StaticGraph& graph, const DeepSTGC& net,
                                 const SignalSequence& inputs);

/// Same layout as the parameters of a DeepSTGC.
struct ModelGradients {
  std::vector<std::vector<Matrix>> dW;
  std::vector<std::vector<Matrix>> dV;
  Matrix head;
  Matrix bias;

  static ModelGradients zeros_like(const DeepSTGC& net);
  ModelGradients& operator+=(const ModelGradients& other);
  ModelGradients& operator*=(double s);
};

struct LossAndGrads {
  double loss = 0.0;
  std::vector<double> probabilities;
  ModelGradients grads;
};

/// Cross-entropy -log p_label and its exact gradient.
LossAndGrads loss_and_grads(const DeepSTGC& net, const StaticGraph& graph,
                            const SignalSequence& inputs, std::size_t label);

/// Mutable views over every parameter block / gradient block, in the same order.
std::vector<std::span<double>> parameter_blocks(DeepSTGC& net);
std::vector<std::span<double>> gradient_blocks(ModelGradients& grads);

/// Binary checkpoint at `path` plus a JSON sidecar `path + ".json"` with
/// hyperparameters (K1, K2, widths, head_input, n_classes, ...).
void save_checkpoint(const DeepSTGC& net, const std::filesystem::path& path);
DeepSTGC load_checkpoint(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

}  // namespace stgc
