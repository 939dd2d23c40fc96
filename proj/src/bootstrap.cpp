#include "levyband/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "levyband/errors.hpp"
#include "levyband/threading.hpp"

namespace levyband {

void BootstrapConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("bootstrap replications must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0,1)");
}

double multiplier_sup(const InfluenceMatrix& im, std::span<const double> s,
                      std::span<const double> weights) {
  if (s.size() != im.p || weights.size() != im.n)
    throw std::invalid_argument("multiplier_sup: size mismatch");
  for (std::size_t i = 0; i < im.p; ++i)
    if (!(s[i] > 0.0)) throw DegenerateVarianceError(static_cast<double>(i));

  std::vector<cd> acc(im.p, cd{});
  double wsum = 0.0;
  for (std::size_t j = 0; j < im.n; ++j) {
    const double w = weights[j];
    wsum += w;
    if (w == 0.0) continue;
    const cd* row = im.a.data() + j * im.p;
    for (std::size_t i = 0; i < im.p; ++i) acc[i] += w * row[i];
  }
  // subtract (sum w) * column mean: equals sum_j w_j (a_j - abar)
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(im.n));
  double sup = 0.0;
  for (std::size_t i = 0; i < im.p; ++i) {
    const cd centered = acc[i] - wsum * im.col_mean[i];
    sup = std::max(sup, std::abs(centered) * inv_sqrt_n / s[i]);
  }
  return sup;
}

double quantile_from_sups(std::span<const double> sups, double tau) {
  const std::size_t b = sups.size();
  std::vector<double> sorted(sups.begin(), sups.end());
  std::sort(sorted.begin(), sorted.end());
  const double raw = static_cast<double>(b) * (1.0 - tau);
  std::size_t idx = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, b);
  return sorted[idx - 1];
}

QuantileDraws bootstrap_quantile(const InfluenceMatrix& im, std::span<const double> s,
                                 const BootstrapConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < im.p; ++i)
    if (!(s[i] > 0.0)) throw DegenerateVarianceError(static_cast<double>(i));

  QuantileDraws out;
  out.sups.assign(static_cast<std::size_t>(cfg.replications), 0.0);
  const Rng root(cfg.seed);

  parallel_for(static_cast<std::size_t>(cfg.replications), cfg.threads,
               [&](std::size_t lo, std::size_t hi) {
    std::vector<double> w(im.n);
    for (std::size_t b = lo; b < hi; ++b) {
      Rng rng = root.child(b);
      for (auto& v : w) v = rng.normal();
      out.sups[b] = multiplier_sup(im, s, w);
    }
  });

  out.c_hat = quantile_from_sups(out.sups, cfg.tau);
  return out;
}

ConfidenceBand confidence_band(const DensityEstimate& est, double c_hat, double tau,
                               std::int64_t n, double delta) {
  if (est.s.size() != est.x.size())
    throw std::invalid_argument("estimate is missing the variance column");
  ConfidenceBand band;
  band.x = est.x;
  band.c_hat = c_hat;
  band.tau = tau;
  band.n = n;
  band.delta = delta;
  band.h = est.h;
  band.rho_re.resize(est.x.size());
  band.s = est.s;
  band.lo.resize(est.x.size());
  band.hi.resize(est.x.size());
  const double scale = c_hat / (std::sqrt(static_cast<double>(n)) * delta);
  for (std::size_t i = 0; i < est.x.size(); ++i) {
    const double center = est.rho[i].real();
    const double half = est.s[i] * scale;
    band.rho_re[i] = center;
    band.lo[i] = center - half;
    band.hi[i] = center + half;
  }
  return band;
}

CoverageReport run_coverage(const ModelRef& model, const SamplingScheme& scheme,
                            const EstimatorConfig& est_cfg,
                            const BootstrapConfig& boot_cfg,
                            const CoverageConfig& cov_cfg) {
  if (cov_cfg.replications < 1)
    throw std::invalid_argument("coverage replications must be >= 1");
  const GroundTruth truth = GroundTruth::from(model.triplet);
  const std::vector<double> xs = est_cfg.resolved_eval_points();
  std::vector<double> rho_true(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    rho_true[i] = truth.transformed_density(xs[i]);

  CoverageReport rep;
  rep.rows.assign(static_cast<std::size_t>(cov_cfg.replications), CoverageReplicate{});
  const Rng root(cov_cfg.seed);

  // Replicates parallelize at the outer level; inner stages run single
  // threaded so the partition stays deterministic and balanced.
  EstimatorConfig inner_est = est_cfg;
  inner_est.threads = 1;
  BootstrapConfig inner_boot = boot_cfg;
  inner_boot.threads = 1;

  parallel_for(static_cast<std::size_t>(cov_cfg.replications), cov_cfg.threads,
               [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      CoverageReplicate& row = rep.rows[r];
      row.index = static_cast<int>(r);
      try {
        SamplingScheme rep_scheme = scheme;
        rep_scheme.seed = root.child(r).bits();
        ObservationSeries data;
        switch (cov_cfg.generator) {
          case GeneratorKind::path:
            data = make_observations(model.triplet, model.kernel, rep_scheme);
            break;
          case GeneratorKind::limit_series:
            data = sample_limit_increments(model.triplet, model.kernel, rep_scheme,
                                           LimitSampler::series);
            break;
          case GeneratorKind::limit_inversion:
            data = sample_limit_increments(model.triplet, model.kernel, rep_scheme,
                                           LimitSampler::inversion);
            break;
        }
        EstimationContext ctx(data, inner_est);
        const DensityEstimate est = ctx.full_estimate();
        BootstrapConfig bc = inner_boot;
        bc.seed = splitmix64(rep_scheme.seed ^ 0xb007u);
        const QuantileDraws q = bootstrap_quantile(ctx.influence(), est.s, bc);
        const ConfidenceBand band =
          confidence_band(est, q.c_hat, bc.tau, est.n, est.delta);

        bool covered = true;
        double maxw = 0.0, sumw = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double w = band.hi[i] - band.lo[i];
          maxw = std::max(maxw, w);
          sumw += w;
          if (rho_true[i] < band.lo[i] || rho_true[i] > band.hi[i]) covered = false;
        }
        row.ok = true;
        row.covered = covered;
        row.max_width = maxw;
        row.mean_width = sumw / static_cast<double>(xs.size());
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  });

  int covered_count = 0;
  double width_sum = 0.0;
  for (const auto& row : rep.rows) {
    if (!row.ok) {
      ++rep.failures;
      continue;
    }
    ++rep.completed;
    covered_count += row.covered ? 1 : 0;
    width_sum += row.mean_width;
    rep.max_width = std::max(rep.max_width, row.max_width);
  }
  rep.coverage = rep.completed > 0
    ? static_cast<double>(covered_count) / static_cast<double>(rep.completed)
    : 0.0;
  rep.mean_width = rep.completed > 0 ? width_sum / rep.completed : 0.0;
  const double nn = static_cast<double>(scheme.n);
  rep.width_scale = std::sqrt(std::log(nn)) /
                    std::sqrt(nn * scheme.delta * est_cfg.h * est_cfg.h * est_cfg.h);
  return rep;
}

void write_band_csv(const ConfidenceBand& band, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::fputs("x,rho_hat_re,s_hat,lo,hi\n", f);
  for (std::size_t i = 0; i < band.x.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", band.x[i], band.rho_re[i],
                 band.s[i], band.lo[i], band.hi[i]);
  std::fclose(f);
}

void write_coverage_csv(const CoverageReport& rep, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::fputs("replicate,covered,max_width\n", f);
  for (const auto& row : rep.rows) {
    if (row.ok)
      std::fprintf(f, "%d,%d,%.17g\n", row.index, row.covered ? 1 : 0, row.max_width);
    else
      std::fprintf(f, "%d,failed,nan\n", row.index);
  }
  std::fclose(f);
}

}  // namespace levyband
