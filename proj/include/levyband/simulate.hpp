#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levyband/levy_model.hpp"

namespace levyband {

struct SamplingScheme {
  double delta = 0.01;
  std::int64_t n = 1000;
  std::uint64_t seed = 1;

  static double auto_delta(std::int64_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }
  void validate() const;
  // Assumption check h^3 >= kappa * delta for a candidate bandwidth; advisory.
  bool bandwidth_admissible(double h, double kappa = 1.0) const;
};

// Jump times/sizes of the two one-sided compound Poisson parts. Times are
// stored as actual (signed) locations, increasing within each side.
struct JumpRecord {
  std::vector<double> forward_times;   // in [0, t_hi]
  std::vector<double> forward_sizes;
  std::vector<double> backward_times;  // in [t_lo, 0)
  std::vector<double> backward_sizes;

  std::size_t count_in(double lo, double hi) const;
};

struct ObservationSeries {
  std::vector<double> increments;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string mode;  // "path", "limit-series" or "limit-inversion"
};

JumpRecord draw_jumps(double t_lo, double t_hi, const LevyTriplet& t, Rng& rng);

// Deterministic part: drift constant + kernel-weighted jump sums on a sorted
// time grid. Separated from the RNG so tests can inject jumps directly.
std::vector<double> evaluate_ma_path(const std::vector<double>& t_grid,
                                     const JumpRecord& jumps, const LevyTriplet& t,
                                     const MAKernel& k);

// Path of Z on t_grid; jumps are drawn on the grid span padded by the kernel
// support radius on each side. sigma > 0 adds a grid approximation of the
// Gaussian component with mesh delta_hint/10.
std::vector<double> simulate_ma_path(const std::vector<double>& t_grid,
                                     const LevyTriplet& t, const MAKernel& k,
                                     std::uint64_t seed, double delta_hint = 0.0);

// The observation pipeline derived from the MA path: X_j = (Z_{j delta} -
// Z_{(j-1) delta})/delta and increments X_j - X_{j-1}.
ObservationSeries make_observations(const LevyTriplet& t, const MAKernel& k,
                                    const SamplingScheme& scheme);

enum class LimitSampler { series, inversion };

// I.i.d. increments drawn from the limiting law itself (characteristic
// function exp(delta * Psi)). "series" uses the exact drift + compound
// Poisson representation of L_alpha psi; "inversion" samples the jump law by
// numerically inverting its quadrature CDF instead (cross-check route).
ObservationSeries sample_limit_increments(const LevyTriplet& t, const MAKernel& k,
                                          const SamplingScheme& scheme,
                                          LimitSampler mode = LimitSampler::series);

void write_csv(const ObservationSeries& s, const std::string& path);
ObservationSeries read_csv(const std::string& path);
void write_binary(const ObservationSeries& s, const std::string& path);
ObservationSeries read_binary(const std::string& path);

}  // namespace levyband
