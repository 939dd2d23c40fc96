#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace levyband {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded stream with hand-rolled samplers so that output is reproducible
// bit-for-bit across standard library implementations. Child streams are
// derived by index, which keeps parallel and serial runs identical.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : mixed_(splitmix64(seed)), gen_(mixed_) {}

  Rng child(std::uint64_t index) const {
    Rng r(0);
    r.mixed_ = splitmix64(mixed_ ^ splitmix64(index + 0x51ed2701ULL));
    r.gen_.seed(r.mixed_);
    return r;
  }

  // uniform on (0,1), never exactly 0 or 1
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  // product method; fine for the moderate means used here
  std::int64_t poisson(double mean) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::uint64_t bits() { return gen_(); }

private:
  std::uint64_t mixed_ = 0;
  std::mt19937_64 gen_;
};

}  // namespace levyband
