#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "levyband/levy_model.hpp"

namespace levyband {

// Fourier transform of the smoothing kernel W: identically 1 on [-c, c],
// quintic smoothstep bridge down to 0 at |t| = 1, zero beyond. C^2 on the
// whole line; the flat top makes every polynomial moment of W vanish.
double flat_top_fourier(double t, double c);

struct SmoothingKernel {
  double flat_top = 0.5;
  std::function<double(double)> fourier_override;  // injection point for tests

  void validate() const;
  double fourier(double t) const {
    return fourier_override ? fourier_override(t) : flat_top_fourier(t, flat_top);
  }
};

// Uniform frequency grid on [-1/h, 1/h] with an odd node count so u = 0 is a
// node. Estimation bandwidths h' >= h can reuse one grid: their integrands
// vanish outside [-1/h', 1/h'].
struct SpectralGrid {
  double h = 0.15;
  int size = 4097;

  void validate() const;
  double u_max() const { return 1.0 / h; }
  double spacing() const { return 2.0 / (h * static_cast<double>(size - 1)); }
  int center() const { return (size - 1) / 2; }
  double node(int k) const { return static_cast<double>(k - center()) * spacing(); }
};

// Per-node characteristic function and exponent derivatives. Holds either
// sample quantities (ECF and log-ECF derivatives) or model quantities
// (exp(delta Psi) and Psi derivatives); every consumer treats both the same.
struct CfNode {
  cd phi;
  cd psi;   // branch-unwound log(phi)/delta, zero at u = 0
  cd psi1;
  cd psi2;
  cd psi3;
};

class CfTable {
public:
  SpectralGrid grid;
  double delta = 0.0;
  double alpha = 0.0;
  double floor_eps = 0.05;
  std::vector<CfNode> nodes;
  int valid_radius = 0;  // |phi| >= floor_eps on [center - r, center + r]

  static CfTable from_sample(std::span<const double> data, const SpectralGrid& grid,
                             double delta, double alpha, double floor_eps = 0.05,
                             int threads = 0);
  static CfTable from_model(const LevyTriplet& t, const MAKernel& k,
                            const SpectralGrid& grid, double delta,
                            double floor_eps = 0.05, int threads = 0);

  // Throws BandwidthTooSmallError if some node with |u| <= u_abs fell below
  // the stability floor.
  void require_coverage(double u_abs) const;
  double min_abs_phi(double u_abs) const;
};

// ECF derivative of order m at a single frequency: (1/n) sum (i x_j)^m e^{iux_j}.
cd ecf(std::span<const double> data, double u, int m);

// The four weight functions multiplying the ECF-derivative fluctuations in
// the linearized estimator error; "source" semantics follow the node.
std::array<cd, 4> spectral_weights(const CfNode& node, double u, double delta,
                                   double alpha);

// K_m(z) = -(1/2pi) int e^{-iuz} Q_m(u) phi_W(uh) du by trapezoid over the
// grid; one pass over the frequency nodes serves the whole z array.
std::vector<cd> spectral_kernel(int m, std::span<const double> z, const CfTable& cf,
                                const SmoothingKernel& w, double h, int threads = 0);

// All four kernels tabulated on a uniform z-grid, cubic interpolation.
class SpectralKernelTable {
public:
  static SpectralKernelTable build(const CfTable& cf, const SmoothingKernel& w,
                                   double h, double z_lo, double z_hi,
                                   int threads = 0);
  cd eval(int m, double z) const;
  double z_lo() const { return z0_; }
  double z_hi() const { return z0_ + dz_ * static_cast<double>(vals_[0].size() - 1); }

private:
  double z0_ = 0.0;
  double dz_ = 1.0;
  std::array<std::vector<cd>, 4> vals_;
};

}  // namespace levyband
