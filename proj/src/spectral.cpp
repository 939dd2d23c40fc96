#include "levyband/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "levyband/errors.hpp"
#include "levyband/threading.hpp"

namespace levyband {

namespace {
constexpr cd kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double flat_top_fourier(double t, double c) {
  const double a = std::fabs(t);
  if (a <= c) return 1.0;
  if (a >= 1.0) return 0.0;
  const double s = (a - c) / (1.0 - c);
  const double step = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  return 1.0 - step;
}

void SmoothingKernel::validate() const {
  if (!(flat_top > 0.0 && flat_top < 1.0))
    throw std::invalid_argument("flat-top fraction must lie in (0,1)");
}

void SpectralGrid::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("grid bandwidth must be > 0");
  if (size < 9 || size % 2 == 0)
    throw std::invalid_argument("grid size must be odd and >= 9");
}

cd ecf(std::span<const double> data, double u, int m) {
  if (m < 0 || m > 3) throw std::invalid_argument("ecf derivative order must be 0..3");
  cd acc{0.0, 0.0};
  for (double x : data) {
    cd term = std::polar(1.0, u * x);
    for (int i = 0; i < m; ++i) term *= kI * x;
    acc += term;
  }
  return acc / static_cast<double>(data.size());
}

namespace {

// Fills psi/psi1..3 for nodes at and right of the center from phi values,
// then mirrors onto the left half by Hermitian symmetry. Also locates the
// stability radius.
void finish_table(CfTable& cf) {
  const int c = cf.grid.center();
  const int n = cf.grid.size;
  auto& nodes = cf.nodes;

  nodes[c].psi = cd{0.0, 0.0};
  cd log_acc{0.0, 0.0};
  for (int k = c; k < n; ++k) {
    CfNode& nd = nodes[k];
    const cd phi = nd.phi;
    const double mag = std::abs(phi);
    if (k > c && mag > 1e-12 && std::abs(nodes[k - 1].phi) > 1e-12) {
      log_acc += std::log(phi / nodes[k - 1].phi);
      nd.psi = log_acc / cf.delta;
    } else if (k > c) {
      nd.psi = cd{0.0, 0.0};
    }
    if (mag > 1e-12) {
      const cd r1 = nd.psi1 / phi;  // psi1..3 hold raw phi derivatives on entry
      const cd r2 = nd.psi2 / phi;
      const cd r3 = nd.psi3 / phi;
      nd.psi1 = r1 / cf.delta;
      nd.psi2 = (r2 - r1 * r1) / cf.delta;
      nd.psi3 = (r3 - 3.0 * r2 * r1 + 2.0 * r1 * r1 * r1) / cf.delta;
    } else {
      nd.psi1 = nd.psi2 = nd.psi3 = cd{0.0, 0.0};
    }
  }
  for (int k = 0; k < c; ++k) {
    const CfNode& src = nodes[2 * c - k];
    CfNode& nd = nodes[k];
    nd.phi = std::conj(src.phi);
    nd.psi = std::conj(src.psi);
    nd.psi1 = -std::conj(src.psi1);
    nd.psi2 = std::conj(src.psi2);
    nd.psi3 = -std::conj(src.psi3);
  }

  int radius = c;
  for (int r = 0; r <= c; ++r) {
    if (std::abs(nodes[c + r].phi) < cf.floor_eps) {
      radius = r - 1;
      break;
    }
  }
  cf.valid_radius = radius;
}

}  // namespace

CfTable CfTable::from_sample(std::span<const double> data, const SpectralGrid& grid,
                             double delta, double alpha, double floor_eps,
                             int threads) {
  grid.validate();
  if (data.empty()) throw std::invalid_argument("empty observation series");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");

  CfTable cf;
  cf.grid = grid;
  cf.delta = delta;
  cf.alpha = alpha;
  cf.floor_eps = floor_eps;
  cf.nodes.assign(static_cast<std::size_t>(grid.size), CfNode{});

  // Sorted copy: accumulation order is then independent of the input
  // permutation, and fixed blocks make it independent of the thread count.
  std::vector<double> xs(data.begin(), data.end());
  std::sort(xs.begin(), xs.end());

  const int c = grid.center();
  const int nright = grid.size - c;  // nodes c..size-1
  const double du = grid.spacing();

  constexpr std::size_t kBlock = 8192;
  const std::size_t nblocks = (xs.size() + kBlock - 1) / kBlock;
  std::vector<std::vector<cd>> partial(nblocks);

  parallel_blocks(xs.size(), threads, kBlock,
                  [&](std::size_t b, std::size_t lo, std::size_t hi) {
    std::vector<cd>& acc = partial[b];
    acc.assign(static_cast<std::size_t>(nright) * 4, cd{0.0, 0.0});
    for (std::size_t j = lo; j < hi; ++j) {
      const double x = xs[j];
      const cd ratio = std::polar(1.0, du * x);
      const cd m1 = kI * x;
      const cd m2 = -x * x;
      const cd m3 = m2 * m1;
      cd e{1.0, 0.0};
      cd* row = acc.data();
      for (int k = 0; k < nright; ++k, row += 4) {
        row[0] += e;
        row[1] += m1 * e;
        row[2] += m2 * e;
        row[3] += m3 * e;
        e *= ratio;
      }
    }
  });

  std::vector<cd> total(static_cast<std::size_t>(nright) * 4, cd{0.0, 0.0});
  for (std::size_t b = 0; b < nblocks; ++b)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += partial[b][i];

  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (int k = 0; k < nright; ++k) {
    CfNode& nd = cf.nodes[static_cast<std::size_t>(c + k)];
    nd.phi = total[4 * k + 0] * inv_n;
    nd.psi1 = total[4 * k + 1] * inv_n;  // raw phi', fixed up in finish_table
    nd.psi2 = total[4 * k + 2] * inv_n;
    nd.psi3 = total[4 * k + 3] * inv_n;
  }
  finish_table(cf);
  return cf;
}

CfTable CfTable::from_model(const LevyTriplet& t, const MAKernel& k,
                            const SpectralGrid& grid, double delta, double floor_eps,
                            int threads) {
  grid.validate();
  k.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");

  CfTable cf;
  cf.grid = grid;
  cf.delta = delta;
  cf.alpha = k.alpha;
  cf.floor_eps = floor_eps;
  cf.nodes.assign(static_cast<std::size_t>(grid.size), CfNode{});

  const CharExponentTable tab(t, grid.u_max() * (1.0 + 1e-9), threads);
  const int c = grid.center();

  parallel_for(static_cast<std::size_t>(grid.size - c), threads,
               [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const int kk = c + static_cast<int>(i);
      const double u = grid.node(kk);
      CfNode& nd = cf.nodes[static_cast<std::size_t>(kk)];
      const cd big_psi = limit_exponent_from_table(tab, k, u, 0);
      nd.psi = big_psi;
      nd.phi = std::exp(delta * big_psi);
      nd.psi1 = limit_exponent_from_table(tab, k, u, 1);
      nd.psi2 = limit_exponent_from_table(tab, k, u, 2);
      nd.psi3 = limit_exponent_from_table(tab, k, u, 3);
    }
  });

  // Mirror and stability radius (model phi never vanishes, but keep the same
  // bookkeeping as the sample path).
  for (int kk = 0; kk < c; ++kk) {
    const CfNode& src = cf.nodes[static_cast<std::size_t>(2 * c - kk)];
    CfNode& nd = cf.nodes[static_cast<std::size_t>(kk)];
    nd.phi = std::conj(src.phi);
    nd.psi = std::conj(src.psi);
    nd.psi1 = -std::conj(src.psi1);
    nd.psi2 = std::conj(src.psi2);
    nd.psi3 = -std::conj(src.psi3);
  }
  int radius = c;
  for (int r = 0; r <= c; ++r) {
    if (std::abs(cf.nodes[static_cast<std::size_t>(c + r)].phi) < floor_eps) {
      radius = r - 1;
      break;
    }
  }
  cf.valid_radius = radius;
  return cf;
}

void CfTable::require_coverage(double u_abs) const {
  const int needed = static_cast<int>(std::ceil(u_abs / grid.spacing() - 1e-9));
  if (needed <= valid_radius) return;
  const int k = grid.center() + valid_radius + 1;
  const double u = grid.node(k);
  throw BandwidthTooSmallError(u, std::abs(nodes[static_cast<std::size_t>(k)].phi),
                               floor_eps);
}

double CfTable::min_abs_phi(double u_abs) const {
  const int c = grid.center();
  const int r = std::min(c, static_cast<int>(u_abs / grid.spacing()) + 1);
  double m = 1.0;
  for (int k = c - r; k <= c + r; ++k)
    m = std::min(m, std::abs(nodes[static_cast<std::size_t>(k)].phi));
  return m;
}

std::array<cd, 4> spectral_weights(const CfNode& node, double u, double delta,
                                   double alpha) {
  const double c1h = 0.5 * (1.0 - alpha);
  const double c2h = 0.5 * (2.0 - alpha);
  const cd inv_phi = 1.0 / node.phi;
  const cd p1 = node.psi1, p2 = node.psi2, p3 = node.psi3;
  const cd curv = delta * p1 * p1 - p2;
  std::array<cd, 4> q;
  q[0] = delta * inv_phi *
         (c2h * curv - u * c1h * (p3 - 3.0 * delta * p2 * p1 + delta * delta * p1 * p1 * p1));
  q[1] = delta * inv_phi * (3.0 * u * c1h * curv - (2.0 - alpha) * p1);
  q[2] = inv_phi * (c2h - 3.0 * u * delta * p1 * c1h);
  q[3] = inv_phi * (u * c1h);
  return q;
}

namespace {

// Shared core: weights w_m(u_k) = Q_m(u_k) phi_W(u_k h) du, then
// K_m(z) = -(1/2pi) sum_k e^{-i u_k z} w_m(u_k).
struct KernelWeights {
  std::vector<std::array<cd, 4>> w;
  double du;
};

KernelWeights kernel_weights(const CfTable& cf, const SmoothingKernel& kern, double h) {
  KernelWeights kw;
  kw.du = cf.grid.spacing();
  kw.w.resize(static_cast<std::size_t>(cf.grid.size));
  for (int k = 0; k < cf.grid.size; ++k) {
    const double u = cf.grid.node(k);
    const double taper = kern.fourier(u * h);
    if (taper == 0.0) {
      kw.w[static_cast<std::size_t>(k)] = {cd{}, cd{}, cd{}, cd{}};
      continue;
    }
    const CfNode& nd = cf.nodes[static_cast<std::size_t>(k)];
    if (std::abs(nd.phi) < cf.floor_eps)
      throw BandwidthTooSmallError(u, std::abs(nd.phi), cf.floor_eps);
    auto q = spectral_weights(nd, u, cf.delta, cf.alpha);
    for (auto& v : q) v *= taper * kw.du;
    kw.w[static_cast<std::size_t>(k)] = q;
  }
  return kw;
}

void eval_kernels(const KernelWeights& kw, const SpectralGrid& grid,
                  std::span<const double> z, int threads,
                  const std::function<void(std::size_t, const std::array<cd, 4>&)>& sink) {
  const int c = grid.center();
  parallel_for(z.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double zi = z[i];
      const cd ratio = std::polar(1.0, -kw.du * zi);
      cd e = std::polar(1.0, static_cast<double>(c) * kw.du * zi);  // e^{-i u_0 z}
      std::array<cd, 4> acc{cd{}, cd{}, cd{}, cd{}};
      for (std::size_t k = 0; k < kw.w.size(); ++k) {
        const auto& wk = kw.w[k];
        acc[0] += wk[0] * e;
        acc[1] += wk[1] * e;
        acc[2] += wk[2] * e;
        acc[3] += wk[3] * e;
        e *= ratio;
      }
      for (auto& a : acc) a *= -1.0 / kTwoPi;
      sink(i, acc);
    }
  });
}

}  // namespace

std::vector<cd> spectral_kernel(int m, std::span<const double> z, const CfTable& cf,
                                const SmoothingKernel& w, double h, int threads) {
  if (m < 0 || m > 3) throw std::invalid_argument("kernel order must be 0..3");
  const KernelWeights kw = kernel_weights(cf, w, h);
  std::vector<cd> out(z.size());
  eval_kernels(kw, cf.grid, z, threads,
               [&](std::size_t i, const std::array<cd, 4>& acc) { out[i] = acc[static_cast<std::size_t>(m)]; });
  return out;
}

SpectralKernelTable SpectralKernelTable::build(const CfTable& cf,
                                               const SmoothingKernel& w, double h,
                                               double z_lo, double z_hi, int threads) {
  SpectralKernelTable t;
  t.dz_ = h / 32.0;
  t.z0_ = z_lo - 2.0 * t.dz_;
  const std::size_t n =
    static_cast<std::size_t>(std::ceil((z_hi + 2.0 * t.dz_ - t.z0_) / t.dz_)) + 4;
  std::vector<double> zs(n);
  for (std::size_t i = 0; i < n; ++i) zs[i] = t.z0_ + t.dz_ * static_cast<double>(i);
  for (auto& v : t.vals_) v.resize(n);

  const KernelWeights kw = kernel_weights(cf, w, h);
  eval_kernels(kw, cf.grid, zs, threads,
               [&](std::size_t i, const std::array<cd, 4>& acc) {
                 for (int m = 0; m < 4; ++m) t.vals_[static_cast<std::size_t>(m)][i] = acc[static_cast<std::size_t>(m)];
               });
  return t;
}

cd SpectralKernelTable::eval(int m, double z) const {
  const auto& tab = vals_[static_cast<std::size_t>(m)];
  const std::size_t n = tab.size();
  const double pos = (z - z0_) / dz_;
  if (pos < 0.0 || pos > static_cast<double>(n - 1))
    throw NumericError("spectral kernel table queried outside its range");
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

}  // namespace levyband
