#include "levyband/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "levyband/errors.hpp"
#include "levyband/quadrature.hpp"

namespace levyband {

void SamplingScheme::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("sampling step delta must be > 0");
  if (n < 1) throw std::invalid_argument("number of increments n must be >= 1");
}

bool SamplingScheme::bandwidth_admissible(double h, double kappa) const {
  return h * h * h >= kappa * delta;
}

std::size_t JumpRecord::count_in(double lo, double hi) const {
  auto count_side = [&](const std::vector<double>& times) {
    const auto a = std::lower_bound(times.begin(), times.end(), lo);
    const auto b = std::upper_bound(times.begin(), times.end(), hi);
    return static_cast<std::size_t>(b - a);
  };
  return count_side(forward_times) + count_side(backward_times);
}

JumpRecord draw_jumps(double t_lo, double t_hi, const LevyTriplet& t, Rng& rng) {
  JumpRecord jumps;
  if (t.lambda == 0.0) return jumps;
  // forward part: Poisson arrivals on [0, t_hi]
  for (double s = rng.exponential(t.lambda); s <= t_hi; s += rng.exponential(t.lambda)) {
    jumps.forward_times.push_back(s);
    jumps.forward_sizes.push_back(t.jump_sampler(rng));
  }
  // backward part lives on negative time; generated outward from 0
  std::vector<double> neg_t, neg_y;
  for (double s = rng.exponential(t.lambda); -s >= t_lo; s += rng.exponential(t.lambda)) {
    neg_t.push_back(-s);
    neg_y.push_back(t.jump_sampler(rng));
  }
  jumps.backward_times.assign(neg_t.rbegin(), neg_t.rend());
  jumps.backward_sizes.assign(neg_y.rbegin(), neg_y.rend());
  return jumps;
}

std::vector<double> evaluate_ma_path(const std::vector<double>& t_grid,
                                     const JumpRecord& jumps, const LevyTriplet& t,
                                     const MAKernel& k) {
  if (t_grid.empty()) throw std::domain_error("time grid is empty");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw std::domain_error("time grid must be sorted");

  std::vector<double> times, sizes;
  times.reserve(jumps.forward_times.size() + jumps.backward_times.size());
  sizes.reserve(times.capacity());
  times.insert(times.end(), jumps.backward_times.begin(), jumps.backward_times.end());
  sizes.insert(sizes.end(), jumps.backward_sizes.begin(), jumps.backward_sizes.end());
  times.insert(times.end(), jumps.forward_times.begin(), jumps.forward_times.end());
  sizes.insert(sizes.end(), jumps.forward_sizes.begin(), jumps.forward_sizes.end());

  const double drift = t.gamma * k.integral();
  const double radius = k.support_radius();
  std::vector<double> z(t_grid.size(), drift);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double ti = t_grid[i];
    while (lo < times.size() && times[lo] < ti - radius) ++lo;
    double sum = 0.0;
    for (std::size_t j = lo; j < times.size() && times[j] <= ti + radius; ++j)
      sum += k(ti - times[j]) * sizes[j];
    z[i] += sum;
  }
  return z;
}

std::vector<double> simulate_ma_path(const std::vector<double>& t_grid,
                                     const LevyTriplet& t, const MAKernel& k,
                                     std::uint64_t seed, double delta_hint) {
  if (t_grid.empty()) throw std::domain_error("time grid is empty");
  k.validate();
  Rng rng(seed);
  const double radius = k.support_radius();
  const double t_lo = t_grid.front() - radius;
  const double t_hi = t_grid.back() + radius;
  const JumpRecord jumps = draw_jumps(t_lo, t_hi, t, rng);
  std::vector<double> z = evaluate_ma_path(t_grid, jumps, t, k);

  if (t.sigma > 0.0) {
    // sigma * int K(t-s) dW_s on a fixed fine mesh shared by all t
    double spacing = delta_hint;
    if (spacing <= 0.0 && t_grid.size() > 1) spacing = t_grid[1] - t_grid[0];
    if (spacing <= 0.0) spacing = 0.01;
    const double mesh = spacing / 10.0;
    const std::size_t m = static_cast<std::size_t>(std::ceil((t_hi - t_lo) / mesh));
    std::vector<double> noise(m);
    const double scale = t.sigma * std::sqrt(mesh);
    for (auto& v : noise) v = scale * rng.normal();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double ti = t_grid[i];
      const std::size_t j0 = static_cast<std::size_t>(
        std::max(0.0, std::floor((ti - radius - t_lo) / mesh)));
      double sum = 0.0;
      for (std::size_t j = j0; j < m; ++j) {
        const double s = t_lo + (static_cast<double>(j) + 0.5) * mesh;
        if (s > ti + radius) break;
        sum += k(ti - s) * noise[j];
      }
      z[i] += sum;
    }
  }
  return z;
}

ObservationSeries make_observations(const LevyTriplet& t, const MAKernel& k,
                                    const SamplingScheme& scheme) {
  scheme.validate();
  const std::int64_t n = scheme.n;
  std::vector<double> grid(static_cast<std::size_t>(n) + 2);
  for (std::size_t j = 0; j < grid.size(); ++j)
    grid[j] = static_cast<double>(j) * scheme.delta;
  const std::vector<double> z = simulate_ma_path(grid, t, k, scheme.seed, scheme.delta);

  ObservationSeries out;
  out.delta = scheme.delta;
  out.seed = scheme.seed;
  out.mode = "path";
  out.increments.resize(static_cast<std::size_t>(n));
  for (std::int64_t j = 1; j <= n; ++j) {
    const std::size_t i = static_cast<std::size_t>(j);
    // X_j - X_{j-1} with X_j = (Z_{j d} - Z_{(j-1) d})/d
    out.increments[i - 1] = (z[i + 1] - 2.0 * z[i] + z[i - 1]) / scheme.delta;
  }
  return out;
}

namespace {

// Numerically inverted CDF of the limiting jump law V*J, V = U^{(1-a)/a}.
class LimitJumpInverter {
public:
  LimitJumpInverter(const LevyTriplet& t, double alpha) {
    const double zmax = t.jump_cutoff;
    const double p = alpha / (1.0 - alpha);
    // CDF table of the raw jump law
    const std::size_t nf = 8001;
    std::vector<double> fj(nf);
    const double dz = zmax / static_cast<double>(nf - 1);
    fj[0] = 0.0;
    for (std::size_t i = 1; i < nf; ++i)  // midpoint rule, safe at the x=0 edge
      fj[i] = fj[i - 1] + dz * t.jump_density((static_cast<double>(i) - 0.5) * dz);
    auto jump_cdf = [&](double z) {
      if (z <= 0.0) return 0.0;
      if (z >= zmax) return fj.back();
      const double pos = z / dz;
      const std::size_t i = static_cast<std::size_t>(pos);
      const double s = pos - static_cast<double>(i);
      return fj[i] * (1.0 - s) + fj[i + 1] * s;
    };

    // F(z) = int_0^1 p v^{p-1} F_jump(z/v) dv
    grid_.resize(2001);
    cdf_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double z = zmax * static_cast<double>(i) / static_cast<double>(grid_.size() - 1);
      grid_[i] = z;
      cdf_[i] = (i == 0) ? 0.0
                         : integrate([&](double v) {
                             return p * std::pow(v, p - 1.0) * jump_cdf(z / v);
                           }, 0.0, 1.0, 1e-9);
    }
    const double total = cdf_.back();
    for (auto& c : cdf_) c /= total;
    for (std::size_t i = 1; i < cdf_.size(); ++i)
      cdf_[i] = std::max(cdf_[i], cdf_[i - 1]);
  }

  double sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.front();
    if (it == cdf_.end()) return grid_.back();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double w = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
    return grid_[i - 1] + w * (grid_[i] - grid_[i - 1]);
  }

private:
  std::vector<double> grid_, cdf_;
};

}  // namespace

ObservationSeries sample_limit_increments(const LevyTriplet& t, const MAKernel& k,
                                          const SamplingScheme& scheme,
                                          LimitSampler mode) {
  scheme.validate();
  k.validate();
  const double alpha = k.alpha;
  const double drift_rate = 2.0 * (t.gamma - t.lambda * t.truncated_jump_mean());
  const double gauss_sd =
    t.sigma > 0.0 ? t.sigma * std::sqrt(2.0 * scheme.delta / (2.0 - alpha)) : 0.0;
  const double intensity = 2.0 * t.lambda / alpha;
  const double mix_exp = (1.0 - alpha) / alpha;

  ObservationSeries out;
  out.delta = scheme.delta;
  out.seed = scheme.seed;
  out.mode = (mode == LimitSampler::series) ? "limit-series" : "limit-inversion";
  out.increments.resize(static_cast<std::size_t>(scheme.n));

  Rng rng(scheme.seed);
  const double mean_jumps = intensity * scheme.delta;

  if (mode == LimitSampler::series) {
    for (auto& x : out.increments) {
      double v = drift_rate * scheme.delta;
      if (gauss_sd > 0.0) v += gauss_sd * rng.normal();
      if (t.lambda > 0.0) {
        const std::int64_t jumps = rng.poisson(mean_jumps);
        for (std::int64_t j = 0; j < jumps; ++j)
          v += std::pow(rng.uniform(), mix_exp) * t.jump_sampler(rng);
      }
      x = v;
    }
  } else {
    LimitJumpInverter inverter(t, alpha);
    for (auto& x : out.increments) {
      double v = drift_rate * scheme.delta;
      if (gauss_sd > 0.0) v += gauss_sd * rng.normal();
      if (t.lambda > 0.0) {
        const std::int64_t jumps = rng.poisson(mean_jumps);
        for (std::int64_t j = 0; j < jumps; ++j) v += inverter.sample(rng);
      }
      x = v;
    }
  }
  return out;
}

void write_csv(const ObservationSeries& s, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::fputs("j,delta_x\n", f);
  for (std::size_t j = 0; j < s.increments.size(); ++j)
    std::fprintf(f, "%zu,%.17g\n", j + 1, s.increments[j]);
  std::fclose(f);
}

ObservationSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("j,delta_x", 0) != 0)
    throw ConfigError(path + ": expected header 'j,delta_x'");
  ObservationSeries s;
  s.mode = "file";
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": missing comma");
    try {
      s.increments.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return s;
}

void write_binary(const ObservationSeries& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  const std::uint64_t n = s.increments.size();
  unsigned char prefix[8];
  for (int i = 0; i < 8; ++i) prefix[i] = static_cast<unsigned char>((n >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(prefix), 8);
  for (double v : s.increments) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

ObservationSeries read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file: " + path);
  unsigned char prefix[8];
  if (!in.read(reinterpret_cast<char*>(prefix), 8))
    throw ConfigError(path + ": truncated count prefix");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(prefix[i]) << (8 * i);
  ObservationSeries s;
  s.mode = "file";
  s.increments.resize(n);
  for (std::uint64_t j = 0; j < n; ++j) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
      throw ConfigError(path + ": truncated payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    std::memcpy(&s.increments[j], &bits, 8);
  }
  return s;
}

}  // namespace levyband
