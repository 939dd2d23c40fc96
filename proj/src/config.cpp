#include "levyband/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "levyband/errors.hpp"

namespace levyband {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long r = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv,
                              const std::string& origin) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "model.gamma") c.gamma = parse_double(key, value);
    else if (key == "model.sigma") c.sigma = parse_double(key, value);
    else if (key == "model.lambda") c.lambda = parse_double(key, value);
    else if (key == "kernel.alpha") c.alpha = parse_double(key, value);
    else if (key == "scheme.n") c.n = parse_int(key, value);
    else if (key == "scheme.delta") {
      if (value == "auto") { c.delta_auto = true; c.delta = 0.0; }
      else { c.delta_auto = false; c.delta = parse_double(key, value); }
    }
    else if (key == "generator") {
      if (value != "path" && value != "limit" && value != "limit-inversion")
        throw ConfigError("key 'generator': expected path|limit|limit-inversion, got '" +
                          value + "'");
      c.generator = value;
    }
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "estimator.h") {
      if (value == "grid") { c.h_grid = true; }
      else { c.h_grid = false; c.h = parse_double(key, value); }
    }
    else if (key == "estimator.a") c.interval_lo = parse_double(key, value);
    else if (key == "estimator.b") c.interval_hi = parse_double(key, value);
    else if (key == "estimator.points") c.points = static_cast<int>(parse_int(key, value));
    else if (key == "estimator.M") c.grid_size = static_cast<int>(parse_int(key, value));
    else if (key == "estimator.flat_top") c.flat_top = parse_double(key, value);
    else if (key == "estimator.sigma_sq") {
      if (value == "true") { c.sigma_sq_true = true; }
      else { c.sigma_sq_true = false; c.sigma_sq = parse_double(key, value); }
    }
    else if (key == "estimator.floor") c.floor_eps = parse_double(key, value);
    else if (key == "estimator.smoothness") c.smoothness = parse_double(key, value);
    else if (key == "grid.replications") c.grid_replications = static_cast<int>(parse_int(key, value));
    else if (key == "bootstrap.B") c.bootstrap_b = static_cast<int>(parse_int(key, value));
    else if (key == "bootstrap.tau") c.tau = parse_double(key, value);
    else if (key == "coverage.replications") c.coverage_replications = static_cast<int>(parse_int(key, value));
    else throw ConfigError(origin + ": unknown key '" + key + "'");
  }
  return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key or value");
    if (kv.count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  try {
    return from_map(kv, path);
  } catch (const ConfigError&) {
    throw;
  }
}

double RunConfig::resolved_delta() const {
  return delta_auto ? SamplingScheme::auto_delta(n) : delta;
}

LevyTriplet RunConfig::triplet() const {
  return LevyTriplet::exponential_jumps(gamma, sigma, lambda);
}

MAKernel RunConfig::kernel() const { return MAKernel{alpha}; }

SamplingScheme RunConfig::scheme() const {
  return SamplingScheme{resolved_delta(), n, seed};
}

EstimatorConfig RunConfig::estimator_config(int threads) const {
  EstimatorConfig e;
  e.h = h;
  e.alpha = alpha;
  e.sigma_sq_hat = resolved_sigma_sq();
  e.interval_lo = interval_lo;
  e.interval_hi = interval_hi;
  e.eval_count = points;
  e.grid_size = grid_size;
  e.flat_top = flat_top;
  e.floor_eps = floor_eps;
  e.threads = threads;
  return e;
}

BootstrapConfig RunConfig::bootstrap_config(int threads) const {
  BootstrapConfig b;
  b.replications = bootstrap_b;
  b.tau = tau;
  b.seed = splitmix64(seed ^ 0xb007u);
  b.threads = threads;
  return b;
}

GeneratorKind RunConfig::generator_kind() const {
  if (generator == "path") return GeneratorKind::path;
  if (generator == "limit-inversion") return GeneratorKind::limit_inversion;
  return GeneratorKind::limit_series;
}

std::map<std::string, std::string> RunConfig::resolved_keys() const {
  std::map<std::string, std::string> kv;
  kv["model.gamma"] = fmt(gamma);
  kv["model.sigma"] = fmt(sigma);
  kv["model.lambda"] = fmt(lambda);
  kv["kernel.alpha"] = fmt(alpha);
  kv["scheme.n"] = std::to_string(n);
  kv["scheme.delta"] = fmt(resolved_delta());
  kv["generator"] = generator;
  kv["seed"] = std::to_string(seed);
  kv["estimator.h"] = h_grid ? "grid" : fmt(h);
  kv["estimator.a"] = fmt(interval_lo);
  kv["estimator.b"] = fmt(interval_hi);
  kv["estimator.points"] = std::to_string(points);
  kv["estimator.M"] = std::to_string(grid_size);
  kv["estimator.flat_top"] = fmt(flat_top);
  kv["estimator.sigma_sq"] = sigma_sq_true ? "true" : fmt(sigma_sq);
  kv["estimator.floor"] = fmt(floor_eps);
  kv["estimator.smoothness"] = fmt(smoothness);
  kv["grid.replications"] = std::to_string(grid_replications);
  kv["bootstrap.B"] = std::to_string(bootstrap_b);
  kv["bootstrap.tau"] = fmt(tau);
  kv["coverage.replications"] = std::to_string(coverage_replications);
  return kv;
}

}  // namespace levyband
