#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "levyband/bootstrap.hpp"
#include "levyband/errors.hpp"
#include "oracle_utils.hpp"

using namespace levyband;

namespace {

const LevyTriplet kDefault = LevyTriplet::exponential_jumps(5.0, 0.0, 1.0);
const MAKernel kA08{0.8};

struct Fixture {
  ObservationSeries data;
  EstimatorConfig cfg;
  std::unique_ptr<EstimationContext> ctx;
  DensityEstimate est;

  explicit Fixture(std::int64_t n, std::uint64_t seed = 5, int points = 11) {
    // delta large enough that every draw carries jumps, so the variance
    // estimate stays bounded away from zero even for tiny n
    data = sample_limit_increments(kDefault, kA08, SamplingScheme{0.5, n, seed});
    cfg.h = 0.18;
    cfg.alpha = 0.8;
    cfg.eval_count = points;
    cfg.grid_size = 1025;
    cfg.threads = 1;
    ctx = std::make_unique<EstimationContext>(data, cfg);
    est = ctx->full_estimate();
  }
};

}  // namespace

TEST_CASE("zero weights give a zero supremum") {
  Fixture f(64);
  const std::vector<double> w(f.ctx->influence().n, 0.0);
  CHECK(multiplier_sup(f.ctx->influence(), f.est.s, w) == 0.0);
}

TEST_CASE("constant weights cancel against the centering") {
  Fixture f(64);
  const std::vector<double> w(f.ctx->influence().n, 1.0);
  CHECK(multiplier_sup(f.ctx->influence(), f.est.s, w) <= 1e-12);
}

TEST_CASE("toy multiplier process matches the brute-force double sum") {
  Fixture f(4, 9, 5);
  f.data.increments = {0.6, -0.2, 1.4, 0.3};
  f.ctx = std::make_unique<EstimationContext>(f.data, f.cfg);
  f.est = f.ctx->full_estimate();
  const InfluenceMatrix& im = f.ctx->influence();
  const std::vector<double> w{0.3, -1.2, 0.5, 2.0};
  const double got = multiplier_sup(im, f.est.s, w);

  double sup = 0.0;
  for (std::size_t i = 0; i < im.p; ++i) {
    cd inner{};
    for (std::size_t jp = 0; jp < im.n; ++jp) inner += im.at(jp, i);
    inner /= static_cast<double>(im.n);
    cd acc{};
    for (std::size_t j = 0; j < im.n; ++j) acc += w[j] * (im.at(j, i) - inner);
    sup = std::max(sup, std::abs(acc) / (f.est.s[i] * std::sqrt(4.0)));
  }
  CHECK(std::fabs(got - sup) <= 1e-12 * std::max(1.0, sup));
}

TEST_CASE("weight sign flip leaves the supremum unchanged") {
  Fixture f(32);
  Rng rng(11);
  std::vector<double> w(f.ctx->influence().n);
  for (auto& v : w) v = rng.normal();
  std::vector<double> neg(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) neg[j] = -w[j];
  CHECK(multiplier_sup(f.ctx->influence(), f.est.s, w) ==
        multiplier_sup(f.ctx->influence(), f.est.s, neg));
}

TEST_CASE("degenerate variance is rejected") {
  Fixture f(16);
  std::vector<double> s = f.est.s;
  s[3] = 0.0;
  const std::vector<double> w(f.ctx->influence().n, 1.0);
  CHECK_THROWS_AS(multiplier_sup(f.ctx->influence(), s, w), DegenerateVarianceError);
  BootstrapConfig bc;
  bc.replications = 3;
  CHECK_THROWS_AS(bootstrap_quantile(f.ctx->influence(), s, bc), DegenerateVarianceError);
}

TEST_CASE("quantile order statistic") {
  const std::vector<double> sups{0.5, 2.0, 1.0, 3.0};
  CHECK(quantile_from_sups(sups, 0.5) == 1.0);   // ceil(4*0.5) = 2nd smallest
  CHECK(quantile_from_sups(sups, 0.25) == 2.0);  // ceil(3) = 3rd
  CHECK(quantile_from_sups(sups, 0.1) == 3.0);   // ceil(3.6) = 4th
  CHECK(quantile_from_sups(sups, 0.75) == 0.5);  // ceil(1) = 1st

  const std::vector<double> one{1.7};
  for (double tau : {0.05, 0.5, 0.9}) CHECK(quantile_from_sups(one, tau) == 1.7);
}

TEST_CASE("bootstrap quantile: replay, monotonicity and determinism") {
  Fixture f(128);
  BootstrapConfig bc;
  bc.replications = 200;
  bc.seed = 77;
  const QuantileDraws draws = bootstrap_quantile(f.ctx->influence(), f.est.s, bc);
  REQUIRE(draws.sups.size() == 200);
  CHECK(draws.c_hat == quantile_from_sups(draws.sups, bc.tau));

  CHECK(quantile_from_sups(draws.sups, 0.05) >= quantile_from_sups(draws.sups, 0.5));

  const QuantileDraws again = bootstrap_quantile(f.ctx->influence(), f.est.s, bc);
  CHECK(again.c_hat == draws.c_hat);
  for (std::size_t b = 0; b < draws.sups.size(); ++b)
    CHECK(again.sups[b] == draws.sups[b]);

  BootstrapConfig threaded = bc;
  threaded.threads = 3;
  const QuantileDraws par = bootstrap_quantile(f.ctx->influence(), f.est.s, threaded);
  for (std::size_t b = 0; b < draws.sups.size(); ++b)
    CHECK(par.sups[b] == draws.sups[b]);

  BootstrapConfig single = bc;
  single.replications = 1;
  for (double tau : {0.05, 0.5, 0.9}) {
    single.tau = tau;
    CHECK(bootstrap_quantile(f.ctx->influence(), f.est.s, single).c_hat == draws.sups[0]);
  }
}

TEST_CASE("multiplier replicates are conditionally centered") {
  Fixture f(128, 3, 9);
  const InfluenceMatrix& im = f.ctx->influence();
  const int B = 2000;
  const Rng root(55);
  std::vector<cd> sum(im.p, cd{});
  std::vector<double> sumsq(im.p, 0.0);
  std::vector<double> w(im.n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(im.n));
  for (int b = 0; b < B; ++b) {
    Rng rng = root.child(static_cast<std::uint64_t>(b));
    for (auto& v : w) v = rng.normal();
    double wsum = 0.0;
    for (double v : w) wsum += v;
    for (std::size_t i = 0; i < im.p; ++i) {
      cd acc{};
      for (std::size_t j = 0; j < im.n; ++j) acc += w[j] * im.at(j, i);
      const cd t = (acc - wsum * im.col_mean[i]) * inv_sqrt_n / f.est.s[i];
      sum[i] += t;
      sumsq[i] += std::norm(t);
    }
  }
  for (std::size_t i = 0; i < im.p; ++i) {
    const double mean_mod = std::abs(sum[i]) / B;
    const double sd = std::sqrt(std::max(0.0, sumsq[i] / B - std::norm(sum[i] / static_cast<double>(B))));
    CHECK(mean_mod <= 3.0 * sd / std::sqrt(static_cast<double>(B)));
  }
}

TEST_CASE("confidence band geometry") {
  Fixture f(256);
  BootstrapConfig bc;
  bc.replications = 100;
  const QuantileDraws draws = bootstrap_quantile(f.ctx->influence(), f.est.s, bc);
  const ConfidenceBand band =
    confidence_band(f.est, draws.c_hat, bc.tau, f.est.n, f.est.delta);

  const double scale = draws.c_hat / (std::sqrt(static_cast<double>(f.est.n)) * f.est.delta);
  for (std::size_t i = 0; i < band.x.size(); ++i) {
    CHECK(band.lo[i] <= band.hi[i]);
    // symmetric by construction; recovered half-widths agree to rounding
    const double up = band.hi[i] - band.rho_re[i];
    const double down = band.rho_re[i] - band.lo[i];
    CHECK(std::fabs(up - down) <= 1e-15 * (1.0 + std::fabs(band.rho_re[i]) + up));
    CHECK(band.hi[i] - band.lo[i] == doctest::Approx(2.0 * f.est.s[i] * scale).epsilon(1e-14));
  }

  const ConfidenceBand degenerate = confidence_band(f.est, 0.0, 0.1, f.est.n, f.est.delta);
  for (std::size_t i = 0; i < degenerate.x.size(); ++i) {
    CHECK(degenerate.lo[i] == degenerate.hi[i]);
    CHECK(degenerate.lo[i] == f.est.rho[i].real());
  }
}

TEST_CASE("band is reproducible bit for bit") {
  auto make_band = [](int threads) {
    Fixture f(512, 21);
    EstimatorConfig cfg = f.cfg;
    cfg.threads = threads;
    EstimationContext ctx(f.data, cfg);
    const DensityEstimate est = ctx.full_estimate();
    BootstrapConfig bc;
    bc.replications = 150;
    bc.seed = 8;
    bc.threads = threads;
    const QuantileDraws draws = bootstrap_quantile(ctx.influence(), est.s, bc);
    return confidence_band(est, draws.c_hat, bc.tau, est.n, est.delta);
  };
  const ConfidenceBand a = make_band(1);
  const ConfidenceBand b = make_band(4);
  REQUIRE(a.x.size() == b.x.size());
  CHECK(a.c_hat == b.c_hat);
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    CHECK(a.lo[i] == b.lo[i]);
    CHECK(a.hi[i] == b.hi[i]);
  }
}

TEST_CASE("bootstrap quantile is stable across seed sets") {
  Fixture f(2000, 13, 21);
  BootstrapConfig a;
  a.replications = 2000;
  a.seed = 100;
  BootstrapConfig b = a;
  b.seed = 200;
  const double c1 = bootstrap_quantile(f.ctx->influence(), f.est.s, a).c_hat;
  const double c2 = bootstrap_quantile(f.ctx->influence(), f.est.s, b).c_hat;
  CHECK(std::fabs(c1 - c2) <= 0.05 * c1);
}

TEST_CASE("near-zero miscoverage gives a band that almost always covers") {
  const ModelRef model{kDefault, kA08};
  const SamplingScheme scheme{0.01, 10000, 8};
  EstimatorConfig est_cfg;
  est_cfg.h = 0.15;
  est_cfg.alpha = 0.8;
  est_cfg.eval_count = 21;
  est_cfg.grid_size = 2049;
  est_cfg.threads = 1;
  BootstrapConfig boot;
  boot.replications = 5000;
  boot.tau = 0.001;
  CoverageConfig cov;
  cov.replications = 10;
  cov.seed = 4;
  const CoverageReport rep = run_coverage(model, scheme, est_cfg, boot, cov);
  CHECK(rep.failures == 0);
  CHECK(rep.coverage >= 0.99);
}

TEST_CASE("coverage experiment smoke run") {
  const ModelRef model{kDefault, kA08};
  const SamplingScheme scheme{0.05, 600, 31};
  EstimatorConfig est_cfg;
  est_cfg.h = 0.25;
  est_cfg.alpha = 0.8;
  est_cfg.eval_count = 15;
  est_cfg.grid_size = 1025;
  est_cfg.threads = 1;
  BootstrapConfig boot;
  boot.replications = 60;
  boot.seed = 2;
  CoverageConfig cov;
  cov.replications = 4;
  cov.seed = 99;
  cov.threads = 2;

  const CoverageReport rep = run_coverage(model, scheme, est_cfg, boot, cov);
  CHECK(rep.completed == 4);
  CHECK(rep.failures == 0);
  CHECK(rep.coverage >= 0.0);
  CHECK(rep.coverage <= 1.0);
  const double nn = 600.0;
  CHECK(rep.width_scale ==
        doctest::Approx(std::sqrt(std::log(nn) / (nn * 0.05 * std::pow(0.25, 3.0)))));
  for (const auto& row : rep.rows) {
    CHECK(row.ok);
    CHECK(row.max_width >= row.mean_width);
    CHECK(row.mean_width > 0.0);
  }

  // determinism across thread counts
  CoverageConfig serial = cov;
  serial.threads = 1;
  const CoverageReport rep2 = run_coverage(model, scheme, est_cfg, boot, serial);
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    CHECK(rep.rows[r].covered == rep2.rows[r].covered);
    CHECK(rep.rows[r].max_width == rep2.rows[r].max_width);
  }
}
