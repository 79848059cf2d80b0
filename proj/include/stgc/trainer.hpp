#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "stgc/data.hpp"
#include "stgc/model.hpp"

namespace stgc {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  std::size_t eval_every = 1;
  /// Frames kept per sequence (0 keeps all frames, no segment sampling).
  std::size_t segments = kDefaultSegments;
  bool jitter = true;
  /// Augmented views drawn per training sequence per epoch.
  std::size_t aug_copies = 8;
  double epsilon = kStabilityEpsilon;
  /// Stop once an evaluation reaches this training-split accuracy (> 1 disables).
  double stop_train_accuracy = 2.0;

  void validate() const;
};

/// Reads every TrainConfig field that is present; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);

/// Training plus model hyperparameters, as read by `stgc train --config`:
/// a JSON object of TrainConfig fields with an optional "model" object
/// (mode, K1, K2, widths, head_input). n_classes and input_dim come from the
/// dataset.
struct RunConfig {
  TrainConfig train;
  ModelConfig model;
};
RunConfig run_config_from_json(const nlohmann::json& j);

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<std::vector<std::size_t>> confusion;  // rows = true class
};

/// Precision/recall per class from a confusion matrix (0/0 reads as 0).
Metrics metrics_from_confusion(std::vector<std::vector<std::size_t>> confusion);

/// Argmax of forward_deep per sequence. Sequences are centered and, when
/// `segments` > 0, reduced to the middle frame of each segment.
Metrics evaluate(const DeepSTGC& net, const std::vector<SkeletonSequence>& sequences,
                 std::size_t segments = kDefaultSegments);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::size_t updates = 0;
  /// Parameter updates after which a layer failed the stability audit.
  std::size_t constraint_violations = 0;
  bool evaluated = false;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  DeepSTGC net;
  std::vector<EpochRecord> history;
};

/// Mini-batch SGD with momentum on the train split; after every update each
/// layer is passed through project_stable. Deterministic for a fixed seed.
/// `on_epoch`, when set, is called after each epoch with the current state.
TrainResult train(DeepSTGC net, const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpochRecord&, const DeepSTGC&)>& on_epoch = {});

}  // namespace stgc
