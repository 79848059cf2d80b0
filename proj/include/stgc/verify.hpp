#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "stgc/graph.hpp"
#include "stgc/layer.hpp"

namespace stgc {

/// One line of the self-check report.
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst residual / error observed
  double threshold = 0.0;  // pass limit for `value`
  std::string detail;
};

/// Suites: "spectral", "stability", "gradients", or "all".
std::vector<CheckResult> run_verification(const std::string& suite, std::uint64_t seed = 20240601);

std::string format_report(const std::vector<CheckResult>& results);
nlohmann::json report_to_json(const std::vector<CheckResult>& results);

/// Random undirected graph: each pair joined with probability `density`,
/// weights uniform in [0.5, 1.5].
StaticGraph random_graph(std::size_t n, std::mt19937_64& rng, double density = 0.5);

/// Random bank with entries uniform in [-scale, scale], projected.
FilterBank random_projected_bank(SignalMode mode, std::size_t K1, std::size_t K2,
                                 std::size_t d_in, std::size_t d_out, std::mt19937_64& rng,
                                 double scale = 0.2, double epsilon = kStabilityEpsilon);

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0);

/// |a - b| / max(|a|, |b|, floor): relative error with an absolute floor for
/// entries that are numerically zero.
double relative_error(double a, double b, double floor = 1e-6);

}  // namespace stgc
