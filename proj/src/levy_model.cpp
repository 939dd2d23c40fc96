#include "levyband/levy_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "levyband/quadrature.hpp"
#include "levyband/threading.hpp"

namespace levyband {

namespace {

constexpr cd kI{0.0, 1.0};

// 10-point Gauss-Legendre nodes/weights on [-1,1], positive half.
constexpr double kGL10Nodes[5] = {
  0.148874338981631, 0.433395394129247, 0.679409568299024,
  0.865063366688985, 0.973906528517172};
constexpr double kGL10Weights[5] = {
  0.295524224714753, 0.269266719309996, 0.219086362515982,
  0.149451349150581, 0.066671344308688};

}  // namespace

void MAKernel::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("MA kernel exponent alpha must lie in (0,1)");
}

double MAKernel::operator()(double x) const {
  const double ax = alpha * std::fabs(x);
  if (ax >= 1.0) return 0.0;
  return std::pow(1.0 - ax, 1.0 / alpha);
}

LevyTriplet LevyTriplet::exponential_jumps(double gamma, double sigma, double lambda) {
  LevyTriplet t;
  t.gamma = gamma;
  t.sigma = sigma;
  t.lambda = lambda;
  t.jump_density = [](double x) { return x > 0.0 ? std::exp(-x) : 0.0; };
  t.jump_sampler = [](Rng& rng) { return rng.exponential(); };
  t.jump_cutoff = 32.0;
  return t;
}

void LevyTriplet::validate() const {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (lambda > 0.0) {
    if (!jump_density) throw std::invalid_argument("jump_density required when lambda > 0");
    const double mass = integrate([&](double x) { return jump_density(x); }, 0.0,
                                  jump_cutoff, 1e-12);
    if (std::fabs(mass - 1.0) > 1e-8)
      throw std::invalid_argument("jump_density must integrate to 1 over (0,inf); got " +
                                  std::to_string(mass));
    const double m7 = integrate([&](double x) { return std::pow(x, 7.0) * jump_density(x); },
                                0.0, 2.0 * jump_cutoff, 1e-8);
    if (!std::isfinite(m7))
      throw std::invalid_argument("moment condition failed: int x^7 nu(dx) not finite");
  }
}

double LevyTriplet::truncated_jump_mean() const {
  if (lambda == 0.0) return 0.0;
  return integrate([&](double x) { return x * jump_density(x); }, 0.0, 1.0, 1e-12);
}

GroundTruth GroundTruth::from(const LevyTriplet& t) {
  return GroundTruth{t.lambda, t.jump_density};
}

double GroundTruth::levy_density(double x) const {
  if (x <= 0.0 || lambda == 0.0) return 0.0;
  return lambda * jump_density(x);
}

double GroundTruth::transformed_density(double x) const {
  if (x == 0.0) throw std::domain_error("transformed density is undefined at x = 0");
  return x * x * levy_density(x);
}

cd char_exponent(double u, const LevyTriplet& t) {
  cd value = kI * t.gamma * u - 0.5 * t.sigma * t.sigma * u * u;
  if (t.lambda > 0.0 && u != 0.0) {
    const cd jump = integrate(
      [&](double x) { return (std::exp(kI * u * x) - 1.0) * t.jump_density(x); }, 0.0,
      t.jump_cutoff, 1e-10);
    value += t.lambda * (jump - kI * u * t.truncated_jump_mean());
  }
  return value;
}

cd char_exponent_derivative(double u, int k, const LevyTriplet& t) {
  if (k < 1 || k > 3) throw std::invalid_argument("derivative order must be 1..3");
  auto moment = [&](int m) {
    return integrate(
      [&](double x) { return std::pow(x, m) * std::exp(kI * u * x) * t.jump_density(x); },
      0.0, t.jump_cutoff, 1e-10);
  };
  switch (k) {
    case 1: {
      cd v = kI * t.gamma - t.sigma * t.sigma * u;
      if (t.lambda > 0.0) v += kI * t.lambda * (moment(1) - t.truncated_jump_mean());
      return v;
    }
    case 2: {
      cd v = -t.sigma * t.sigma;
      if (t.lambda > 0.0) v -= t.lambda * moment(2);
      return v;
    }
    default: {
      cd v = 0.0;
      if (t.lambda > 0.0) v = -kI * t.lambda * moment(3);
      return v;
    }
  }
}

double ma_average_inverse(double f_at_x, double df_at_x, double x, double alpha) {
  return 0.5 * alpha * f_at_x + 0.5 * (1.0 - alpha) * x * df_at_x;
}

cd limit_exponent(double u, const LevyTriplet& t, const MAKernel& k) {
  if (u == 0.0) return 0.0;
  const double c = (1.0 - k.alpha) / k.alpha;
  return (2.0 / k.alpha) *
         integrate([&](double w) { return char_exponent(u * std::pow(w, c), t); }, 0.0,
                   1.0, 1e-10);
}

cd limit_exponent_derivative(double u, int deriv, const LevyTriplet& t,
                             const MAKernel& mk) {
  const double c = (1.0 - mk.alpha) / mk.alpha;
  return (2.0 / mk.alpha) *
         integrate(
           [&](double w) {
             const double y = std::pow(w, c);
             return char_exponent_derivative(u * y, deriv, t) * std::pow(y, deriv);
           },
           0.0, 1.0, 1e-10);
}

cd limit_cf(double u, double delta, const LevyTriplet& t, const MAKernel& k) {
  return std::exp(delta * limit_exponent(u, t, k));
}

CharExponentTable::CharExponentTable(const LevyTriplet& t, double vmax, int threads)
  : vmax_(vmax), gamma_(t.gamma), sigma_(t.sigma), lambda_(t.lambda) {
  if (!(vmax > 0.0)) throw std::invalid_argument("vmax must be positive");
  m1_ = t.truncated_jump_mean();

  // Interpolation step small enough that 4-point cubic error stays below
  // the 1e-10 quadrature budget for moments up to x^3.
  const std::size_t nodes = std::max<std::size_t>(64, static_cast<std::size_t>(vmax / 1.5e-3) + 4);
  dv_ = vmax_ / static_cast<double>(nodes - 1);
  for (auto& m : moments_) m.assign(nodes, cd{0.0, 0.0});

  if (lambda_ > 0.0) {
    // Fixed Gauss-Legendre panels over x, short enough that the oscillation
    // e^{ivx} stays resolved at v = vmax. Jump-density values are shared
    // across all v nodes.
    double cutoff = t.jump_cutoff;
    while (cutoff < 1e4 &&
           std::pow(cutoff, 3.0) * t.jump_density(cutoff) > 1e-15)
      cutoff *= 1.25;
    const double panel = std::min(0.5, 2.0 * std::numbers::pi / vmax_);
    const std::size_t npanels = static_cast<std::size_t>(std::ceil(cutoff / panel));
    std::vector<double> xs, fw;  // node positions and weight * density
    xs.reserve(npanels * 10);
    fw.reserve(npanels * 10);
    for (std::size_t p = 0; p < npanels; ++p) {
      const double a = p * panel, b = std::min(cutoff, (p + 1) * panel);
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int i = 0; i < 5; ++i) {
        for (double sgn : {-1.0, 1.0}) {
          const double x = mid + sgn * half * kGL10Nodes[i];
          xs.push_back(x);
          fw.push_back(half * kGL10Weights[i] * t.jump_density(x));
        }
      }
    }
    parallel_for(nodes, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        const double v = j * dv_;
        cd m0{}, m1{}, m2{}, m3{};
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double x = xs[i];
          const cd e = std::polar(fw[i], v * x);
          m0 += e;
          m1 += x * e;
          m2 += (x * x) * e;
          m3 += (x * x * x) * e;
        }
        moments_[0][j] = m0;
        moments_[1][j] = m1;
        moments_[2][j] = m2;
        moments_[3][j] = m3;
      }
    });
  }
}

cd CharExponentTable::moment(int k, double v) const {
  const auto& tab = moments_[k];
  const std::size_t n = tab.size();
  const double pos = v / dv_;
  // 4-point Lagrange stencil centered on the containing cell
  std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(pos), n - 2);
  std::size_t base = (cell == 0) ? 0 : cell - 1;
  if (base + 3 >= n) base = n - 4;
  const double s = pos - static_cast<double>(base);
  const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  const double l1 = s * (s - 2) * (s - 3) / 2.0;
  const double l2 = -s * (s - 1) * (s - 3) / 2.0;
  const double l3 = s * (s - 1) * (s - 2) / 6.0;
  return l0 * tab[base] + l1 * tab[base + 1] + l2 * tab[base + 2] + l3 * tab[base + 3];
}

cd CharExponentTable::eval(int k, double v) const {
  if (k < 0 || k > 3) throw std::invalid_argument("derivative order must be 0..3");
  if (std::fabs(v) > vmax_ * (1.0 + 1e-12))
    throw std::invalid_argument("char exponent table queried beyond vmax");
  const bool neg = v < 0.0;
  const double va = std::min(std::fabs(v), vmax_);
  cd out;
  switch (k) {
    case 0: {
      out = kI * gamma_ * va - 0.5 * sigma_ * sigma_ * va * va;
      if (lambda_ > 0.0)
        out += lambda_ * (moment(0, va) - moment(0, 0.0) - kI * va * m1_);
      break;
    }
    case 1: {
      out = kI * gamma_ - sigma_ * sigma_ * va;
      if (lambda_ > 0.0) out += kI * lambda_ * (moment(1, va) - m1_);
      break;
    }
    case 2: {
      out = cd{-sigma_ * sigma_, 0.0};
      if (lambda_ > 0.0) out -= lambda_ * moment(2, va);
      break;
    }
    default: {
      out = cd{0.0, 0.0};
      if (lambda_ > 0.0) out = -kI * lambda_ * moment(3, va);
      break;
    }
  }
  if (!neg) return out;
  // psi^{(k)}(-v) = (-1)^k conj(psi^{(k)}(v))
  const cd conj = std::conj(out);
  return (k % 2 == 0) ? conj : -conj;
}

cd limit_exponent_from_table(const CharExponentTable& tab, const MAKernel& k, double u,
                             int deriv, double abs_tol) {
  if (deriv == 0 && u == 0.0) return 0.0;
  const double c = (1.0 - k.alpha) / k.alpha;
  return (2.0 / k.alpha) *
         integrate(
           [&](double w) {
             const double y = std::pow(w, c);
             cd val = tab.eval(deriv, u * y);
             for (int i = 0; i < deriv; ++i) val *= y;
             return val;
           },
           0.0, 1.0, abs_tol);
}

}  // namespace levyband
