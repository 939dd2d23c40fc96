#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "levyband/config.hpp"
#include "levyband/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace levyband;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitFailures = 4;

struct CommonOpts {
  std::string config_path;
  std::string data_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool oracle_cf = false;
};

json manifest_json(const RunConfig& cfg, const std::string& command,
                   const std::string& mode = "") {
  json m;
  m["command"] = command;
  if (!mode.empty()) m["mode"] = mode;
  json keys;
  for (const auto& [k, v] : cfg.resolved_keys()) keys[k] = v;
  m["config"] = keys;
  return m;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = RunConfig::parse_file(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

ObservationSeries generate(const RunConfig& cfg) {
  switch (cfg.generator_kind()) {
    case GeneratorKind::path:
      return make_observations(cfg.triplet(), cfg.kernel(), cfg.scheme());
    case GeneratorKind::limit_inversion:
      return sample_limit_increments(cfg.triplet(), cfg.kernel(), cfg.scheme(),
                                     LimitSampler::inversion);
    default:
      return sample_limit_increments(cfg.triplet(), cfg.kernel(), cfg.scheme(),
                                     LimitSampler::series);
  }
}

// Resolves estimator.h = grid via the two-stage search against the known
// model (simulation-study mode), writing the MSE table alongside.
double resolve_bandwidth(const RunConfig& cfg, const CommonOpts& opts,
                         const fs::path& out) {
  if (!cfg.h_grid) return cfg.h;
  const GroundTruth truth = GroundTruth::from(cfg.triplet());
  EstimatorConfig base = cfg.estimator_config(opts.threads);
  auto generator = [&](std::uint64_t r) {
    RunConfig local = cfg;
    local.seed = Rng(cfg.seed ^ 0x61d5eedULL).child(r).bits();
    return generate(local);
  };
  const GridSearchResult res =
    two_stage_grid_search(truth, generator, cfg.grid_replications, base);
  write_grid_csv(res, (out / "grid.csv").string());
  std::printf("bandwidth grid search winner: h = %g\n", res.best_h);
  return res.best_h;
}

int cmd_simulate(const CommonOpts& opts) {
  const RunConfig cfg = load_config(opts);
  cfg.triplet().validate();
  cfg.kernel().validate();
  const ObservationSeries series = generate(cfg);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  write_csv(series, (out / "observations.csv").string());
  write_binary(series, (out / "observations.bin").string());
  json m = manifest_json(cfg, "simulate", series.mode);
  m["n"] = series.increments.size();
  m["delta"] = series.delta;
  m["seed"] = series.seed;
  write_json(m, out / "manifest.json");
  std::printf("wrote %zu increments (mode %s, delta %g) to %s\n",
              series.increments.size(), series.mode.c_str(), series.delta,
              (out / "observations.csv").string().c_str());
  return 0;
}

ObservationSeries load_data(const RunConfig& cfg, const CommonOpts& opts) {
  if (opts.data_path.empty())
    throw ConfigError("--data <observations.csv> is required for this command");
  ObservationSeries data = read_csv(opts.data_path);
  data.delta = cfg.resolved_delta();
  data.seed = cfg.seed;
  return data;
}

int cmd_estimate(const CommonOpts& opts) {
  const RunConfig cfg = load_config(opts);
  const ObservationSeries data = load_data(cfg, opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  EstimatorConfig est_cfg = cfg.estimator_config(opts.threads);
  est_cfg.h = resolve_bandwidth(cfg, opts, out);
  est_cfg.exact_cf = opts.oracle_cf;
  std::optional<ModelRef> model;
  if (opts.oracle_cf) model = ModelRef{cfg.triplet(), cfg.kernel()};

  EstimationContext ctx(data, est_cfg, model);
  const DensityEstimate est = ctx.full_estimate();
  write_estimate_csv(est, (out / "estimate.csv").string());

  const AdmissibilityReport rep = admissibility_report(
    est.n, est.delta, est_cfg.h, cfg.smoothness);
  json j;
  j["n"] = rep.n;
  j["delta"] = rep.delta;
  j["h"] = rep.h;
  j["smoothness"] = rep.smoothness;
  j["epsilon"] = rep.epsilon;
  j["lower_bound"] = rep.lower_bound;
  j["upper_bound"] = rep.upper_bound;
  j["step_ok"] = rep.step_ok;
  j["lower_ok"] = rep.lower_ok;
  j["upper_ok"] = rep.upper_ok;
  j["im_ratio"] = est.im_ratio();
  write_json(j, out / "admissibility.json");
  write_json(manifest_json(cfg, "estimate", opts.oracle_cf ? "exact-cf" : "plug-in"),
             out / "manifest.json");
  std::printf("wrote estimate for %zu grid points to %s (im ratio %.3g)\n",
              est.x.size(), (out / "estimate.csv").string().c_str(), est.im_ratio());
  return 0;
}

int cmd_band(const CommonOpts& opts) {
  const RunConfig cfg = load_config(opts);
  const ObservationSeries data = load_data(cfg, opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  EstimatorConfig est_cfg = cfg.estimator_config(opts.threads);
  est_cfg.h = resolve_bandwidth(cfg, opts, out);
  est_cfg.exact_cf = opts.oracle_cf;
  std::optional<ModelRef> model;
  if (opts.oracle_cf) model = ModelRef{cfg.triplet(), cfg.kernel()};

  EstimationContext ctx(data, est_cfg, model);
  const DensityEstimate est = ctx.full_estimate();
  const BootstrapConfig boot = cfg.bootstrap_config(opts.threads);
  const QuantileDraws draws = bootstrap_quantile(ctx.influence(), est.s, boot);
  const ConfidenceBand band =
    confidence_band(est, draws.c_hat, boot.tau, est.n, est.delta);
  write_band_csv(band, (out / "band.csv").string());

  double max_width = 0.0, sum_width = 0.0;
  for (std::size_t i = 0; i < band.x.size(); ++i) {
    const double w = band.hi[i] - band.lo[i];
    max_width = std::max(max_width, w);
    sum_width += w;
  }
  json j;
  j["c_hat"] = band.c_hat;
  j["tau"] = band.tau;
  j["B"] = boot.replications;
  j["n"] = band.n;
  j["delta"] = band.delta;
  j["h"] = band.h;
  j["max_width"] = max_width;
  j["mean_width"] = sum_width / static_cast<double>(band.x.size());
  write_json(j, out / "band.json");
  write_json(manifest_json(cfg, "band"), out / "manifest.json");
  std::printf("band quantile c_hat = %.6g (B = %d, tau = %g); wrote %s\n",
              band.c_hat, boot.replications, boot.tau,
              (out / "band.csv").string().c_str());
  return 0;
}

int cmd_coverage(const CommonOpts& opts) {
  const RunConfig cfg = load_config(opts);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  EstimatorConfig est_cfg = cfg.estimator_config(opts.threads);
  est_cfg.h = resolve_bandwidth(cfg, opts, out);
  CoverageConfig cov;
  cov.replications = cfg.coverage_replications;
  cov.seed = splitmix64(cfg.seed ^ 0xc0feULL);
  cov.generator = cfg.generator_kind();
  cov.threads = opts.threads;

  const ModelRef model{cfg.triplet(), cfg.kernel()};
  const CoverageReport rep = run_coverage(model, cfg.scheme(), est_cfg,
                                          cfg.bootstrap_config(1), cov);
  write_coverage_csv(rep, (out / "coverage.csv").string());
  json j;
  j["coverage"] = rep.coverage;
  j["mean_width"] = rep.mean_width;
  j["max_width"] = rep.max_width;
  j["failures"] = rep.failures;
  j["completed"] = rep.completed;
  j["replications"] = cfg.coverage_replications;
  j["width_scale"] = rep.width_scale;
  write_json(j, out / "coverage.json");
  write_json(manifest_json(cfg, "coverage"), out / "manifest.json");
  std::printf("coverage %.3f over %d replicates (%d failed); mean width %.4g\n",
              rep.coverage, rep.completed, rep.failures, rep.mean_width);
  if (rep.failures * 10 > cfg.coverage_replications) return kExitFailures;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levy-driven moving average simulation, spectral density "
               "estimation and multiplier-bootstrap confidence bands"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub, bool with_data) {
    sub->add_option("--config", opts.config_path, "configuration file")->required();
    sub->add_option("--out", opts.out_dir, "output directory (default .)");
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--threads", opts.threads, "worker thread cap (0 = auto)");
    sub->add_flag("--oracle-cf", opts.oracle_cf,
                  "use the model characteristic function instead of the ECF");
    if (with_data)
      sub->add_option("--data", opts.data_path, "observations CSV from 'simulate'");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate an observation series");
  add_common(sim, false);
  CLI::App* est = app.add_subcommand("estimate", "estimate the transformed density");
  add_common(est, true);
  CLI::App* band = app.add_subcommand("band", "estimate plus bootstrap confidence band");
  add_common(band, true);
  CLI::App* cov = app.add_subcommand("coverage", "Monte-Carlo coverage experiment");
  add_common(cov, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(opts);
    if (est->parsed()) return cmd_estimate(opts);
    if (band->parsed()) return cmd_band(opts);
    if (cov->parsed()) return cmd_coverage(opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const BandwidthTooSmallError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
