#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <vector>

#include "levyband/quadrature.hpp"
#include "levyband/rng.hpp"

namespace levyband {

using cd = std::complex<double>;

// Moving-average kernel (1 - a|x|)^{1/a} on |x| <= 1/a, a in (0,1).
struct MAKernel {
  double alpha = 0.5;

  void validate() const;
  double operator()(double x) const;
  double support_radius() const { return 1.0 / alpha; }
  double integral() const { return 2.0 / (1.0 + alpha); }
};

// Driving-process parameters. The jump measure is one-sided: nu(dx) =
// lambda * jump_density(x) dx on (0, inf). jump_sampler draws a single jump
// size and must match jump_density.
struct LevyTriplet {
  double gamma = 5.0;
  double sigma = 0.0;
  double lambda = 1.0;
  std::function<double(double)> jump_density;
  std::function<double(Rng&)> jump_sampler;
  double jump_cutoff = 32.0;  // density < 1e-14 beyond this point

  static LevyTriplet exponential_jumps(double gamma = 5.0, double sigma = 0.0,
                                       double lambda = 1.0);
  void validate() const;
  // m1 = int_0^1 x jump_density(x) dx (truncation correction in the exponent)
  double truncated_jump_mean() const;
};

// nu and rho = x^2 nu for the known model, used as simulation-study truth.
struct GroundTruth {
  double lambda = 1.0;
  std::function<double(double)> jump_density;

  static GroundTruth from(const LevyTriplet& t);
  double levy_density(double x) const;        // 0 for x < 0
  double transformed_density(double x) const; // throws at x = 0
};

// Characteristic exponent psi(u) = i*gamma*u - sigma^2 u^2/2
//   + int (e^{iux} - 1 - iux 1{|x|<=1}) nu(dx), and its u-derivatives.
cd char_exponent(double u, const LevyTriplet& t);
cd char_exponent_derivative(double u, int k, const LevyTriplet& t);  // k = 1..3

// The averaging operator induced by the MA kernel,
//   (L f)(x) = 2/(1-a) x^{-a/(1-a)} int_0^x f(z) z^{(2a-1)/(1-a)} dz,
// evaluated through the substitution z = x w^{(1-a)/a} which removes the
// endpoint singularity. Requires x > 0.
template <class F>
  requires std::invocable<F, double>
auto ma_average(F&& f, double x, double alpha, double abs_tol = 1e-10)
  -> std::invoke_result_t<F, double> {
  if (!(x > 0.0)) throw std::domain_error("ma_average requires x > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  const double c = (1.0 - alpha) / alpha;
  return (2.0 / alpha) *
         integrate([&](double w) { return f(x * std::pow(w, c)); }, 0.0, 1.0, abs_tol);
}

// Closed-form inverse: (a/2) f(x) + ((1-a)/2) x f'(x).
double ma_average_inverse(double f_at_x, double df_at_x, double x, double alpha);

template <class F, class DF>
  requires std::invocable<F, double> && std::invocable<DF, double>
double ma_average_inverse(F&& f, DF&& df, double x, double alpha) {
  return ma_average_inverse(f(x), df(x), x, alpha);
}

// Finite-difference fallback when no analytic derivative is available.
template <class F>
  requires std::invocable<F, double>
double ma_average_inverse_fd(F&& f, double x, double alpha) {
  const double step = std::cbrt(2.2e-16) * std::max(1.0, std::fabs(x));
  const double dfdx = (f(x + step) - f(x - step)) / (2.0 * step);
  return ma_average_inverse(f(x), dfdx, x, alpha);
}

// Limit exponent Psi = L_alpha psi and its derivatives; the limiting
// observations have characteristic function exp(delta * Psi(u)).
cd limit_exponent(double u, const LevyTriplet& t, const MAKernel& k);
cd limit_exponent_derivative(double u, int k, const LevyTriplet& t, const MAKernel& mk);
cd limit_cf(double u, double delta, const LevyTriplet& t, const MAKernel& k);

// psi and its first three derivatives tabulated on [0, vmax] (Hermitian
// continuation below zero). Evaluation is a cubic table lookup; building the
// table costs one pass of composite Gauss-Legendre panels over the jump
// integral per grid node. This is the fast path behind the model-side
// spectral tables; the free functions above stay quadrature-exact.
class CharExponentTable {
public:
  CharExponentTable(const LevyTriplet& t, double vmax, int threads = 0);

  cd eval(int k, double v) const;  // k = 0..3
  double vmax() const { return vmax_; }

private:
  double vmax_ = 0.0;
  double dv_ = 0.0;
  double gamma_ = 0.0, sigma_ = 0.0, lambda_ = 0.0, m1_ = 0.0;
  // jump moment transforms M_k(v) = int x^k e^{ivx} jump_density(x) dx
  std::array<std::vector<cd>, 4> moments_;
  cd moment(int k, double v) const;
};

// Psi^{(k)}(u) computed against a prebuilt table (same integral as
// limit_exponent_derivative, table-backed inner evaluations).
cd limit_exponent_from_table(const CharExponentTable& tab, const MAKernel& k,
                             double u, int deriv, double abs_tol = 1e-10);

}  // namespace levyband
