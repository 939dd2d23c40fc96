#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>

#include "levyband/simulate.hpp"
#include "levyband/spectral.hpp"

namespace levyband {

// Known data-generating model, used for oracle-mode estimation and as the
// truth in simulation studies.
struct ModelRef {
  LevyTriplet triplet;
  MAKernel kernel;
};

struct EstimatorConfig {
  double h = 0.15;
  double alpha = 0.5;        // MA kernel exponent entering the inverse operator
  double sigma_sq_hat = 0.0; // external variance input (true sigma^2 in sim mode)
  double interval_lo = 0.5;
  double interval_hi = 3.0;
  int eval_count = 101;
  std::vector<double> eval_points;  // optional explicit grid inside [lo, hi]
  int grid_size = 4097;
  double grid_h = 0.0;  // frequency range parameter; 0 means "use h"
  double flat_top = 0.5;
  double floor_eps = 0.05;
  double kappa = 1.0;  // constant in the h^3 >= kappa*delta check
  int threads = 0;
  bool exact_cf = false;  // oracle mode: model characteristic function

  void validate() const;
  std::vector<double> resolved_eval_points() const;
  SpectralGrid spectral_grid() const;
  SmoothingKernel smoothing() const;
};

struct DensityEstimate {
  std::vector<double> x;
  std::vector<cd> rho;
  std::vector<double> s;  // pointwise sd estimate; empty if not computed
  std::int64_t n = 0;
  double delta = 0.0;
  double h = 0.0;
  std::uint64_t seed = 0;

  double im_ratio() const;  // sup|Im rho| / (1 + sup|Re rho|)
};

// Per-observation influence terms a_j(x_i) = sum_m i^m x_j^m K_m(x_i - x_j),
// with column means; everything the variance estimate and the multiplier
// bootstrap need.
struct InfluenceMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<cd> a;        // row-major, a[j*p + i]
  std::vector<cd> col_mean; // length p

  cd at(std::size_t j, std::size_t i) const { return a[j * p + i]; }
};

// Shared pipeline state for one (data, config) pair: the spectral table and
// kernel tables are built once and reused by the density estimate, the
// variance estimate and all bootstrap replicates.
class EstimationContext {
public:
  EstimationContext(const ObservationSeries& data, const EstimatorConfig& cfg,
                    std::optional<ModelRef> model = std::nullopt);
  // Reuse an externally built spectral table (bandwidth grid search).
  EstimationContext(const ObservationSeries& data, const EstimatorConfig& cfg,
                    std::shared_ptr<const CfTable> cf,
                    std::optional<ModelRef> model = std::nullopt);

  const CfTable& cf() const { return *cf_; }
  const EstimatorConfig& config() const { return cfg_; }
  std::span<const double> data() const { return data_; }
  double delta() const { return delta_; }

  DensityEstimate density() const;
  const InfluenceMatrix& influence();
  std::vector<double> variance();  // pointwise variance estimate on the grid
  DensityEstimate full_estimate(); // density + sd in one object

private:
  std::vector<double> data_;
  double delta_ = 0.0;
  std::uint64_t seed_ = 0;
  EstimatorConfig cfg_;
  std::vector<double> eval_;
  std::shared_ptr<const CfTable> cf_;
  std::unique_ptr<InfluenceMatrix> influence_;
};

// Single-shot operations (thin wrappers over the context).
DensityEstimate estimate_density(const ObservationSeries& data,
                                 const EstimatorConfig& cfg,
                                 std::optional<ModelRef> model = std::nullopt);
std::vector<double> estimate_variance(const ObservationSeries& data,
                                      const EstimatorConfig& cfg,
                                      std::optional<ModelRef> model = std::nullopt);

struct GridSearchRow {
  double h = 0.0;
  double mse_mean = 0.0;
  double mse_se = 0.0;
  int replications = 0;
};

struct GridSearchResult {
  double best_h = 0.0;
  std::vector<GridSearchRow> rows;
  // per-replication MSE at best_h (column of the internal table)
  std::vector<double> best_mse;
};

// Simulation-study bandwidth selection: argmin over h_grid of the MSE of
// Re rho_hat against the known truth, averaged over replications. Failures at
// a bandwidth count as infinite MSE. Ties resolve to the first (smaller) h.
GridSearchResult bandwidth_grid_search(
  const GroundTruth& truth,
  const std::function<ObservationSeries(std::uint64_t)>& generator,
  std::span<const double> h_grid, int replications, const EstimatorConfig& base);

// Coarse grid 0.05:0.05:0.5 followed by the fixed refinement 0.08:0.01:0.25.
GridSearchResult two_stage_grid_search(
  const GroundTruth& truth,
  const std::function<ObservationSeries(std::uint64_t)>& generator,
  int replications, const EstimatorConfig& base);

struct AdmissibilityReport {
  std::int64_t n = 0;
  double delta = 0.0;
  double h = 0.0;
  double smoothness = 0.0;
  double epsilon = 0.0;      // 1/log n
  double lower_bound = 0.0;  // n^{-(1-eps)/6}
  double upper_bound = 0.0;  // n^{-(1-2eps)/(2r+5)}
  bool step_ok = false;      // h^3 >= kappa * delta
  bool lower_ok = false;
  bool upper_ok = false;
};

AdmissibilityReport admissibility_report(std::int64_t n, double delta, double h,
                                         double smoothness, double kappa = 1.0);

void write_estimate_csv(const DensityEstimate& est, const std::string& path);
void write_grid_csv(const GridSearchResult& res, const std::string& path);

}  // namespace levyband
