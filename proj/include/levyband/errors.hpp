#pragma once

#include <stdexcept>
#include <string>

namespace levyband {

// Configuration / input file problems. Carries enough context to point the
// user at the offending line or key.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A quadrature routine could not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double requested, double achieved)
    : std::runtime_error(what + " (requested abs tol " + std::to_string(requested) +
                         ", achieved " + std::to_string(achieved) + ")"),
      requested_tol(requested), achieved_tol(achieved) {}
  double requested_tol;
  double achieved_tol;
};

// |ECF| dropped below the stability floor inside the active frequency range.
// Remedy: increase the bandwidth h (shrinks the range) or gather more data.
class BandwidthTooSmallError : public std::runtime_error {
public:
  BandwidthTooSmallError(double u_, double abs_phi_, double floor_)
    : std::runtime_error("|ecf| = " + std::to_string(abs_phi_) + " at u = " +
                         std::to_string(u_) + " is below the stability floor " +
                         std::to_string(floor_) + "; increase the bandwidth h"),
      u(u_), abs_phi(abs_phi_), floor(floor_) {}
  double u;
  double abs_phi;
  double floor;
};

// The variance estimate vanished somewhere on the evaluation grid, so the
// studentized multiplier process is undefined there.
class DegenerateVarianceError : public std::runtime_error {
public:
  explicit DegenerateVarianceError(double grid_index_)
    : std::runtime_error("variance estimate vanished at evaluation grid index " +
                         std::to_string(static_cast<long>(grid_index_))),
      grid_index(grid_index_) {}
  double grid_index;
};

// NaN/Inf or other numerical breakdown, with the location that produced it.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace levyband
