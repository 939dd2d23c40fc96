#pragma once

// Test-side oracles: independent, deliberately naive implementations used to
// freeze expected values. Nothing here calls into the library's numeric
// paths beyond plain data types.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

// Composite Simpson on a uniform grid (n must be even).
template <class F>
auto simpson(F&& f, double a, double b, int n) -> decltype(f(a)) {
  using T = decltype(f(a));
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  T acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

// Brute-force ECF derivative, direct term-by-term sum.
inline cd ecf_direct(const std::vector<double>& data, double u, int m) {
  cd acc{0.0, 0.0};
  const cd i{0.0, 1.0};
  for (double x : data) {
    cd term = std::exp(i * u * x);
    for (int k = 0; k < m; ++k) term *= i * x;
    acc += term;
  }
  return acc / static_cast<double>(data.size());
}

// Closed form of the averaging operator on monomials:
// L[z^k](x) = 2 x^k / ((1-a) k + a).
inline double ma_average_monomial(double x, int k, double alpha) {
  return 2.0 * std::pow(x, k) / ((1.0 - alpha) * k + alpha);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Real-space smoothing kernel W from its Fourier transform, by cosine
// quadrature: W(z) = (1/pi) int_0^1 phiW(t) cos(zt) dt.
class SmoothingKernelReal {
public:
  SmoothingKernelReal(const std::function<double(double)>& phi, double zmax,
                      double dz = 0.01)
    : z0_(0.0), dz_(dz) {
    const std::size_t n = static_cast<std::size_t>(zmax / dz) + 2;
    vals_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = i * dz;
      vals_[i] = simpson([&](double t) { return phi(t) * std::cos(z * t); }, 0.0, 1.0,
                         2000) / std::numbers::pi;
    }
  }

  double operator()(double z) const {
    const double a = std::fabs(z);
    const double pos = (a - z0_) / dz_;
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= vals_.size()) return 0.0;
    const double s = pos - i;
    return vals_[i] * (1.0 - s) + vals_[i + 1] * s;
  }

private:
  double z0_, dz_;
  std::vector<double> vals_;
};

// (rho * W_h)(x) by direct quadrature against the real-space kernel.
inline double convolved_density(const std::function<double(double)>& rho,
                                const SmoothingKernelReal& w, double h, double x,
                                double y_lo, double y_hi, int n = 200000) {
  return simpson([&](double y) { return rho(y) * w((x - y) / h) / h; }, y_lo, y_hi, n);
}

}  // namespace oracle
