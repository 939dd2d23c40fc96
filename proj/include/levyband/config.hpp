#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "levyband/bootstrap.hpp"

namespace levyband {

// Flat key=value run configuration. Unknown keys are errors: a silently
// ignored typo in h or delta would invalidate an experiment.
struct RunConfig {
  double gamma = 5.0;
  double sigma = 0.0;
  double lambda = 1.0;
  double alpha = 0.5;

  std::int64_t n = 10000;
  double delta = 0.0;
  bool delta_auto = true;
  std::string generator = "limit";  // path | limit | limit-inversion
  std::uint64_t seed = 1;

  double h = 0.15;
  bool h_grid = false;
  double interval_lo = 0.5;
  double interval_hi = 3.0;
  int points = 101;
  int grid_size = 4097;
  double flat_top = 0.5;
  double sigma_sq = 0.0;
  bool sigma_sq_true = true;
  double floor_eps = 0.05;
  double smoothness = 2.0;
  int grid_replications = 5;

  int bootstrap_b = 2000;
  double tau = 0.1;
  int coverage_replications = 100;

  static RunConfig parse_file(const std::string& path);
  static RunConfig from_map(const std::map<std::string, std::string>& kv,
                            const std::string& origin = "<map>");

  double resolved_delta() const;
  double resolved_sigma_sq() const { return sigma_sq_true ? sigma * sigma : sigma_sq; }
  LevyTriplet triplet() const;
  MAKernel kernel() const;
  SamplingScheme scheme() const;
  EstimatorConfig estimator_config(int threads = 0) const;
  BootstrapConfig bootstrap_config(int threads = 0) const;
  GeneratorKind generator_kind() const;

  // Fully resolved flat key map; feeding it back through from_map reproduces
  // the run exactly.
  std::map<std::string, std::string> resolved_keys() const;
};

}  // namespace levyband
