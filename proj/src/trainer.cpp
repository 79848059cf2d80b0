#include "stgc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <string>

#include "stgc/errors.hpp"

namespace stgc {
namespace {

// Distinct skeletons share one StaticGraph.
class GraphCache {
 public:
  const StaticGraph& get(const SkeletonSequence& s) {
    for (const auto& e : entries_)
      if (e.n_joints == s.n_joints && e.bones == s.bones) return *e.graph;
    entries_.push_back({s.n_joints, s.bones, std::make_shared<StaticGraph>(s.graph())});
    return *entries_.back().graph;
  }

 private:
  struct Entry {
    std::size_t n_joints;
    std::vector<Bone> bones;
    std::shared_ptr<StaticGraph> graph;
  };
  std::vector<Entry> entries_;
};

std::size_t argmax(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument(std::string("unknown key \"") + key + "\" in " + where);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (aug_copies < 1) throw std::invalid_argument("aug_copies must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0, 1)");
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"epochs", "batch_size", "learning_rate", "momentum", "seed", "eval_every",
                  "segments", "jitter", "aug_copies", "epsilon", "stop_train_accuracy"},
                 "training config");
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.momentum = j.value("momentum", c.momentum);
  c.seed = j.value("seed", c.seed);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.segments = j.value("segments", c.segments);
  c.jitter = j.value("jitter", c.jitter);
  c.aug_copies = j.value("aug_copies", c.aug_copies);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.stop_train_accuracy = j.value("stop_train_accuracy", c.stop_train_accuracy);
  c.validate();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},     {"seed", c.seed},             {"eval_every", c.eval_every},
          {"segments", c.segments},     {"jitter", c.jitter},         {"aug_copies", c.aug_copies},
          {"epsilon", c.epsilon},       {"stop_train_accuracy", c.stop_train_accuracy}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig rc;
  nlohmann::json train = j;
  if (j.is_object() && j.contains("model")) {
    const nlohmann::json& m = j.at("model");
    reject_unknown(m, {"mode", "K1", "K2", "widths", "head_input"}, "model config");
    if (m.contains("mode")) rc.model.mode = signal_mode_from_string(m.at("mode").get<std::string>());
    rc.model.K1 = m.value("K1", rc.model.K1);
    rc.model.K2 = m.value("K2", rc.model.K2);
    if (m.contains("widths")) rc.model.widths = m.at("widths").get<std::vector<std::size_t>>();
    if (m.contains("head_input"))
      rc.model.head_input = head_input_from_string(m.at("head_input").get<std::string>());
    train.erase("model");
  }
  rc.train = train_config_from_json(train);
  return rc;
}

Metrics metrics_from_confusion(std::vector<std::vector<std::size_t>> confusion) {
  Metrics m;
  const std::size_t c = confusion.size();
  std::size_t total = 0;
  std::size_t correct = 0;
  m.precision.assign(c, 0.0);
  m.recall.assign(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    if (confusion[i].size() != c) throw DimensionError("confusion matrix must be square");
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += confusion[i][j];
      col += confusion[j][i];
    }
    total += row;
    correct += confusion[i][i];
    m.recall[i] = row ? static_cast<double>(confusion[i][i]) / static_cast<double>(row) : 0.0;
    m.precision[i] = col ? static_cast<double>(confusion[i][i]) / static_cast<double>(col) : 0.0;
  }
  m.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  m.confusion = std::move(confusion);
  return m;
}

Metrics evaluate(const DeepSTGC& net, const std::vector<SkeletonSequence>& sequences,
                 std::size_t segments) {
  std::vector<std::vector<std::size_t>> confusion(net.n_classes,
                                                  std::vector<std::size_t>(net.n_classes, 0));
  GraphCache graphs;
  for (const SkeletonSequence& raw : sequences) {
    if (raw.label >= net.n_classes) throw DimensionError("evaluation label outside model classes");
    SkeletonSequence s = center_orthocenter(raw);
    if (segments > 0) s = segment_center(s, segments);
    const std::vector<double> p = forward_deep(graphs.get(s), net, s.signals());
    ++confusion[s.label][argmax(p)];
  }
  return metrics_from_confusion(std::move(confusion));
}

TrainResult train(DeepSTGC net, const Dataset& dataset, const TrainConfig& config,
                  const std::function<void(const EpochRecord&, const DeepSTGC&)>& on_epoch) {
  config.validate();
  dataset.validate();
  net.validate();
  if (dataset.n_classes() > net.n_classes)
    throw DimensionError("dataset has more classes than the model head");

  std::vector<SkeletonSequence> train_set;
  for (const SkeletonSequence& s : dataset.subset(Split::train)) train_set.push_back(center_orthocenter(s));
  const std::vector<SkeletonSequence> test_set = dataset.subset(Split::test);
  const std::vector<SkeletonSequence> train_raw = dataset.subset(Split::train);
  if (train_set.empty()) throw std::invalid_argument("training split is empty");

  GraphCache graphs;
  std::mt19937_64 rng(config.seed);
  ModelGradients velocity = ModelGradients::zeros_like(net);
  TrainResult result;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<SkeletonSequence> views;
    views.reserve(train_set.size() * config.aug_copies);
    for (const SkeletonSequence& s : train_set)
      for (std::size_t c = 0; c < config.aug_copies; ++c) {
        SkeletonSequence v = config.segments > 0 ? segment_sample(s, config.segments, rng) : s;
        if (config.jitter) v = scale_jitter(v, rng).sequence;
        views.push_back(std::move(v));
      }
    std::vector<std::size_t> order(views.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      ModelGradients batch = ModelGradients::zeros_like(net);
      for (std::size_t b = start; b < stop; ++b) {
        const SkeletonSequence& v = views[order[b]];
        LossAndGrads lg = loss_and_grads(net, graphs.get(v), v.signals(), v.label);
        if (!std::isfinite(lg.loss))
          throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch) +
                                ", sample " + std::to_string(order[b]));
        loss_sum += lg.loss;
        batch += lg.grads;
      }
      batch *= 1.0 / static_cast<double>(stop - start);

      auto params = parameter_blocks(net);
      auto vel = gradient_blocks(velocity);
      auto grads = gradient_blocks(batch);
      for (std::size_t blk = 0; blk < params.size(); ++blk)
        for (std::size_t i = 0; i < params[blk].size(); ++i) {
          vel[blk][i] = config.momentum * vel[blk][i] - config.learning_rate * grads[blk][i];
          params[blk][i] += vel[blk][i];
        }
      for (FilterBank& layer : net.layers) layer = project_stable(layer, config.epsilon);
      ++rec.updates;
      for (const FilterBank& layer : net.layers)
        if (!satisfies_stability_constraints(layer, config.epsilon)) {
          ++rec.constraint_violations;
          break;
        }
    }
    rec.train_loss = loss_sum / static_cast<double>(views.size());

    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      rec.evaluated = true;
      rec.train_accuracy = evaluate(net, train_raw, config.segments).accuracy;
      if (!test_set.empty()) rec.test_accuracy = evaluate(net, test_set, config.segments).accuracy;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, net);
    if (rec.evaluated && rec.train_accuracy >= config.stop_train_accuracy) break;
  }
  result.net = std::move(net);
  return result;
}

}  // namespace stgc
