// stgc: train, evaluate and inspect spatio-temporal graph convolution models.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stgc/data.hpp"
#include "stgc/errors.hpp"
#include "stgc/kernels.hpp"
#include "stgc/model.hpp"
#include "stgc/spectral.hpp"
#include "stgc/stability.hpp"
#include "stgc/trainer.hpp"
#include "stgc/verify.hpp"

namespace {

// Exit status categories.
enum Exit : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kIo = 3,
  kNumerical = 4,
  kInvalid = 5,
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw stgc::FormatError(std::string("config: ") + e.what(), e.byte);
  }
}

nlohmann::json metrics_json(const stgc::Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"confusion", m.confusion}};
}

int cmd_synth(const std::string& out, const stgc::SynthSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const stgc::Dataset ds = stgc::synth_dataset(spec, rng);
  stgc::save_dataset(ds, out);
  std::cout << "wrote " << ds.sequences.size() << " sequences (" << ds.n_classes()
            << " classes) to " << out << '\n';
  return kOk;
}

struct TrainOverrides {
  std::optional<std::size_t> segments;
  std::optional<std::string> jitter;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const std::string& data, const std::string& config_path, const std::string& out,
              const TrainOverrides& ov) {
  stgc::RunConfig rc = config_path.empty() ? stgc::RunConfig{} : stgc::run_config_from_json(read_json(config_path));
  if (ov.segments) rc.train.segments = *ov.segments;
  if (ov.jitter) rc.train.jitter = *ov.jitter == "on";
  if (ov.seed) rc.train.seed = *ov.seed;
  rc.train.validate();

  const stgc::Dataset ds = stgc::load_dataset(data);
  ds.validate();
  if (ds.sequences.empty()) throw std::invalid_argument("dataset is empty");
  rc.model.n_classes = ds.n_classes();
  rc.model.input_dim = 3;

  std::mt19937_64 init_rng(rc.train.seed ^ 0x5EEDF00Dull);
  stgc::DeepSTGC net =
      stgc::DeepSTGC::create(rc.model, ds.sequences.front().n_joints, init_rng, rc.train.epsilon);
  std::cout << "kernels: " << stgc::kernels::active().name << '\n';
  const auto result = stgc::train(std::move(net), ds, rc.train,
                                  [](const stgc::EpochRecord& r, const stgc::DeepSTGC&) {
                                    std::cout << "epoch " << std::setw(4) << r.epoch << "  loss "
                                              << std::setprecision(5) << r.train_loss;
                                    if (r.evaluated)
                                      std::cout << "  train_acc " << r.train_accuracy
                                                << "  test_acc " << r.test_accuracy;
                                    if (r.constraint_violations)
                                      std::cout << "  stability violations " << r.constraint_violations;
                                    std::cout << '\n';
                                  });
  stgc::save_checkpoint(result.net, out);
  std::cout << "saved " << out << " and " << stgc::sidecar_path(out).string() << '\n';
  return kOk;
}

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& split,
             std::size_t segments, bool as_json) {
  const stgc::DeepSTGC net = stgc::load_checkpoint(ckpt);
  const stgc::Dataset ds = stgc::load_dataset(data);
  std::vector<stgc::SkeletonSequence> seqs;
  if (split == "all")
    seqs = ds.sequences;
  else
    seqs = ds.subset(split == "train" ? stgc::Split::train : stgc::Split::test);
  if (seqs.empty()) throw std::invalid_argument("selected split is empty");
  const stgc::Metrics m = stgc::evaluate(net, seqs, segments);
  if (as_json) {
    std::cout << metrics_json(m).dump(2) << '\n';
    return kOk;
  }
  std::cout << "accuracy " << std::fixed << std::setprecision(4) << m.accuracy << '\n';
  std::cout << "class  precision  recall\n";
  for (std::size_t c = 0; c < m.precision.size(); ++c)
    std::cout << std::setw(5) << c << "  " << std::setw(9) << m.precision[c] << "  " << std::setw(6)
              << m.recall[c] << '\n';
  std::cout << "confusion (rows = true class)\n";
  for (const auto& row : m.confusion) {
    for (std::size_t v : row) std::cout << std::setw(6) << v;
    std::cout << '\n';
  }
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& json_out, std::uint64_t seed) {
  const auto results = stgc::run_verification(suite, seed);
  std::cout << stgc::format_report(results);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    if (!out) throw std::runtime_error("cannot write " + json_out);
    out << stgc::report_to_json(results).dump(2) << '\n';
  }
  std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kOk : kCheckFailed;
}

int cmd_spectrum(const std::string& ckpt, const std::string& graph_path, std::size_t layer) {
  const stgc::DeepSTGC net = stgc::load_checkpoint(ckpt);
  const stgc::StaticGraph graph = stgc::read_edge_list(std::filesystem::path(graph_path));
  if (layer >= net.layers.size()) throw std::invalid_argument("layer index out of range");
  const stgc::FilterBank& bank = net.layers[layer];
  const stgc::SpectralDecomposition dec = stgc::graph_spectrum(graph);

  // Per input channel j the multi-scale filter acts as H_j(λ) = Σ_k α_kj λ^k,
  // with α_k the row scales of V_k (the diagonal itself in independent mode).
  std::vector<std::vector<double>> alphas;
  for (std::size_t k = 0; k < bank.K2; ++k) {
    if (bank.mode == stgc::SignalMode::independent) {
      alphas.emplace_back(bank.V[k].values().begin(), bank.V[k].values().end());
    } else {
      alphas.push_back(stgc::decompose_vk(bank.V[k]).alpha);
    }
  }
  std::cout << "lambda,channel,response\n" << std::setprecision(17);
  for (std::size_t j = 0; j < bank.d_in; ++j) {
    std::vector<double> coeffs;
    for (std::size_t k = 0; k < bank.K2; ++k) coeffs.push_back(alphas[k][j]);
    const std::vector<double> h = stgc::polynomial_response(dec, coeffs);
    for (std::size_t i = 0; i < dec.size(); ++i)
      std::cout << dec.eigenvalues[i] << ',' << j << ',' << h[i] << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal graph convolution: training, evaluation and analysis"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic skeleton-action dataset");
  std::string synth_out;
  stgc::SynthSpec spec;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Output dataset file")->required();
  synth->add_option("--classes", spec.n_classes, "Number of classes");
  synth->add_option("--per-class", spec.n_per_class, "Sequences per class");
  synth->add_option("--joints", spec.n_joints, "Joints per skeleton");
  synth->add_option("--frames", spec.frames, "Frames per sequence");
  synth->add_option("--noise", spec.noise, "Gaussian coordinate noise (std dev)");
  synth->add_option("--test-fraction", spec.test_fraction, "Fraction of each class held out");
  synth->add_option("--seed", synth_seed, "Random seed");

  auto* train = app.add_subcommand("train", "Train a deep STGC classifier");
  std::string data;
  std::string config;
  std::string out;
  TrainOverrides ov;
  train->add_option("--data", data, "Dataset file")->required();
  train->add_option("--config", config, "JSON training config");
  train->add_option("--out", out, "Checkpoint path (sidecar written to <out>.json)")->required();
  train->add_option("--segments", ov.segments, "Segments sampled per sequence (0 = all frames)");
  train->add_option("--jitter", ov.jitter, "Scale jitter on|off")->check(CLI::IsMember({"on", "off"}));
  train->add_option("--seed", ov.seed, "Random seed");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string ckpt;
  std::string split = "test";
  std::size_t eval_segments = stgc::kDefaultSegments;
  bool eval_json = false;
  eval->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  eval->add_option("--data", data, "Dataset file")->required();
  eval->add_option("--split", split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  eval->add_option("--segments", eval_segments, "Segments per sequence (0 = all frames)");
  eval->add_flag("--json", eval_json, "Print metrics as JSON");

  auto* verify = app.add_subcommand("verify", "Run the numerical self-checks");
  std::string suite = "all";
  std::string verify_json;
  std::uint64_t verify_seed = 20240601;
  verify->add_option("--suite", suite, "spectral|stability|gradients|all")
      ->check(CLI::IsMember({"spectral", "stability", "gradients", "all"}));
  verify->add_option("--json", verify_json, "Also write the report as JSON to this file");
  verify->add_option("--seed", verify_seed, "Random seed for the generated instances");

  auto* spectrum = app.add_subcommand("spectrum", "Per-channel frequency responses as CSV");
  std::string graph_path;
  std::size_t layer = 0;
  spectrum->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  spectrum->add_option("--graph", graph_path, "Edge-list graph file")->required();
  spectrum->add_option("--layer", layer, "Layer whose spatial filters are reported");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_out, spec, synth_seed);
    if (*train) return cmd_train(data, config, out, ov);
    if (*eval) return cmd_eval(ckpt, data, split, eval_segments, eval_json);
    if (*verify) return cmd_verify(suite, verify_json, verify_seed);
    if (*spectrum) return cmd_spectrum(ckpt, graph_path, layer);
  } catch (const stgc::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kIo;
  } catch (const stgc::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return kNumerical;
  } catch (const stgc::ConvergenceError& e) {
    std::cerr << "did not converge: " << e.what() << '\n';
    return kNumerical;
  } catch (const stgc::DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
