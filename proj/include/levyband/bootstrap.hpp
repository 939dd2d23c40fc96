#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "levyband/estimator.hpp"

namespace levyband {

struct BootstrapConfig {
  int replications = 2000;  // B
  double tau = 0.1;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
};

struct ConfidenceBand {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> rho_re;
  std::vector<double> s;
  double c_hat = 0.0;
  double tau = 0.0;
  std::int64_t n = 0;
  double delta = 0.0;
  double h = 0.0;
  int replications = 0;  // B used for the quantile
};

// sup over the grid of |multiplier process| for one weight vector.
double multiplier_sup(const InfluenceMatrix& im, std::span<const double> s,
                      std::span<const double> weights);

struct QuantileDraws {
  std::vector<double> sups;  // one per replicate, in replicate order
  double c_hat = 0.0;
};

// Draws B standard-normal weight vectors (child stream per replicate, so
// parallel and serial runs agree), records the sup statistics, and returns
// the ceiling-index order statistic sorted[ceil(B(1-tau))].
QuantileDraws bootstrap_quantile(const InfluenceMatrix& im, std::span<const double> s,
                                 const BootstrapConfig& cfg);

double quantile_from_sups(std::span<const double> sups, double tau);

ConfidenceBand confidence_band(const DensityEstimate& est, double c_hat, double tau,
                               std::int64_t n, double delta);

enum class GeneratorKind { path, limit_series, limit_inversion };

struct CoverageConfig {
  int replications = 100;  // R
  std::uint64_t seed = 99;
  GeneratorKind generator = GeneratorKind::limit_series;
  int threads = 0;
};

struct CoverageReplicate {
  int index = 0;
  bool ok = false;       // replicate completed
  bool covered = false;  // truth inside the band at every grid point
  double max_width = 0.0;
  double mean_width = 0.0;
  std::string error;
};

struct CoverageReport {
  std::vector<CoverageReplicate> rows;
  int completed = 0;
  int failures = 0;
  double coverage = 0.0;    // fraction of completed replicates fully covered
  double mean_width = 0.0;  // average over completed replicates
  double max_width = 0.0;   // largest band width seen in any replicate
  double width_scale = 0.0; // (n delta h^3)^{-1/2} sqrt(log n)
};

CoverageReport run_coverage(const ModelRef& model, const SamplingScheme& scheme,
                            const EstimatorConfig& est_cfg,
                            const BootstrapConfig& boot_cfg,
                            const CoverageConfig& cov_cfg);

void write_band_csv(const ConfidenceBand& band, const std::string& path);
void write_coverage_csv(const CoverageReport& rep, const std::string& path);

}  // namespace levyband
