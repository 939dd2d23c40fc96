#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "levyband/errors.hpp"
#include "levyband/simulate.hpp"
#include "levyband/spectral.hpp"
#include "oracle_utils.hpp"

using namespace levyband;

namespace {

std::vector<double> sample_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = 0.3 * rng.normal() + 0.5 * rng.exponential();
  return xs;
}

}  // namespace

TEST_CASE("flat-top fourier transform") {
  CHECK(flat_top_fourier(0.0, 0.5) == 1.0);
  CHECK(flat_top_fourier(0.5, 0.5) == 1.0);
  CHECK(flat_top_fourier(1.0, 0.5) == 0.0);
  CHECK(flat_top_fourier(1.4, 0.5) == 0.0);
  CHECK(flat_top_fourier(0.75, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(flat_top_fourier(-0.3, 0.5) == 1.0);
  CHECK(flat_top_fourier(-0.75, 0.5) == flat_top_fourier(0.75, 0.5));
  // C^2 bridge: smooth joins
  const double eps = 1e-6;
  CHECK(std::fabs(flat_top_fourier(0.5 + eps, 0.5) - 1.0) < 1e-11);
  CHECK(std::fabs(flat_top_fourier(1.0 - eps, 0.5)) < 1e-11);
}

TEST_CASE("ecf basics") {
  const std::vector<double> data{-1.0, 0.0, 1.0};
  CHECK(ecf(data, 0.0, 0) == cd{1.0, 0.0});

  const std::vector<double> single{2.0};
  for (double u : {-0.7, 0.4, 3.0}) {
    const cd v = ecf(single, u, 0);
    CHECK(std::abs(v - std::exp(cd{0.0, 2.0 * u})) < 1e-15);
  }

  // three-point first derivative against the direct sum
  const double u = std::numbers::pi / 2.0;
  const cd got = ecf(data, u, 1);
  CHECK(std::abs(got - oracle::ecf_direct(data, u, 1)) < 1e-15);
}

TEST_CASE("ecf conjugate symmetry and modulus bound") {
  const std::vector<double> data = sample_data(400, 5);
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    const double u = 25.0 * (rng.uniform() - 0.5);
    CHECK(std::abs(ecf(data, u, 0)) <= 1.0 + 1e-12);
    for (int m = 0; m <= 3; ++m) {
      const cd plus = ecf(data, u, m);
      const cd minus = ecf(data, -u, m);
      const cd expected = (m % 2 == 0) ? std::conj(plus) : -std::conj(plus);
      CHECK(std::abs(minus - expected) < 1e-12 * std::max(1.0, std::abs(plus)));
    }
  }
}

TEST_CASE("cf table on degenerate data") {
  const double c = 0.7, delta = 0.05;
  const std::vector<double> data(50, c);
  SpectralGrid grid{0.25, 257};
  const CfTable cf = CfTable::from_sample(data, grid, delta, 0.5);

  const int mid = grid.center();
  CHECK(cf.nodes[static_cast<std::size_t>(mid)].phi == cd{1.0, 0.0});
  CHECK(cf.nodes[static_cast<std::size_t>(mid)].psi == cd{0.0, 0.0});
  for (int k = 0; k < grid.size; ++k) {
    const double u = grid.node(k);
    const CfNode& nd = cf.nodes[static_cast<std::size_t>(k)];
    CHECK(std::abs(nd.phi - std::exp(cd{0.0, u * c})) < 1e-10);
    CHECK(std::abs(nd.psi - cd{0.0, u * c / delta}) < 1e-8 * (1.0 + std::fabs(u) * c / delta));
    CHECK(std::abs(nd.psi1 - cd{0.0, c / delta}) < 1e-8 / delta);
    CHECK(std::abs(nd.psi2) < 1e-7 / delta);
  }
}

TEST_CASE("cf table matches the single-frequency ecf and is Hermitian") {
  const std::vector<double> data = sample_data(300, 21);
  const double delta = 0.02;
  SpectralGrid grid{0.2, 513};
  const CfTable cf = CfTable::from_sample(data, grid, delta, 0.5);
  const int c = grid.center();

  for (int k : {c - 200, c - 37, c, c + 11, c + 200}) {
    const double u = grid.node(k);
    const CfNode& nd = cf.nodes[static_cast<std::size_t>(k)];
    CHECK(std::abs(nd.phi - ecf(data, u, 0)) < 1e-11);
    CHECK(std::abs(nd.phi) <= 1.0 + 1e-12);
  }
  for (int r : {3, 57, 140}) {
    const CfNode& plus = cf.nodes[static_cast<std::size_t>(c + r)];
    const CfNode& minus = cf.nodes[static_cast<std::size_t>(c - r)];
    CHECK(minus.phi == std::conj(plus.phi));    // exact mirror by construction
    CHECK(minus.psi1 == -std::conj(plus.psi1));
    CHECK(minus.psi2 == std::conj(plus.psi2));
    CHECK(minus.psi3 == -std::conj(plus.psi3));
  }
}

TEST_CASE("log-ecf branch is continuous and second derivative matches moments") {
  const std::vector<double> data = sample_data(2000, 8);
  const double delta = 0.03;
  SpectralGrid grid{0.15, 1025};
  const CfTable cf = CfTable::from_sample(data, grid, delta, 0.5);

  // continuity of the unwound branch along the grid
  for (int k = 1; k < grid.size; ++k) {
    const cd step = cf.nodes[static_cast<std::size_t>(k)].psi -
                    cf.nodes[static_cast<std::size_t>(k - 1)].psi;
    CHECK(std::abs(step) * delta < std::numbers::pi);
  }

  // psi2(0) = -(sample central second moment)/delta
  const double m1 = oracle::mean(data);
  double m2c = 0.0;
  for (double x : data) m2c += (x - m1) * (x - m1);
  m2c /= static_cast<double>(data.size());
  const cd psi2 = cf.nodes[static_cast<std::size_t>(grid.center())].psi2;
  CHECK(std::abs(psi2 - cd{-m2c / delta, 0.0}) < 1e-10 / delta);
}

TEST_CASE("spectral weights closed-form checks") {
  const double alpha = 0.5, delta = 0.01;
  CfNode unit;
  unit.phi = cd{1.0, 0.0};
  unit.psi1 = unit.psi2 = unit.psi3 = cd{0.0, 0.0};

  const auto q0 = spectral_weights(unit, 0.0, delta, alpha);
  CHECK(std::abs(q0[3]) == 0.0);                                 // Q3(0) = 0
  CHECK(std::abs(q0[2] - cd{(2.0 - alpha) / 2.0, 0.0}) < 1e-15); // Q2(0)
  CHECK(std::abs(q0[0]) == 0.0);                                 // all terms carry psi derivatives
  CHECK(std::abs(q0[1]) == 0.0);

  const auto q1 = spectral_weights(unit, 2.0, delta, alpha);
  CHECK(std::abs(q1[3] - cd{2.0 * (1.0 - alpha) / 2.0, 0.0}) < 1e-15);
}

TEST_CASE("Q3 is anti-Hermitian on sampled tables") {
  const std::vector<double> data = sample_data(500, 33);
  SpectralGrid grid{0.2, 513};
  const CfTable cf = CfTable::from_sample(data, grid, 0.02, 0.5);
  const int c = grid.center();
  for (int r : {5, 50, 200}) {
    const double u = grid.node(c + r);
    const auto qp = spectral_weights(cf.nodes[static_cast<std::size_t>(c + r)], u,
                                     cf.delta, cf.alpha);
    const auto qm = spectral_weights(cf.nodes[static_cast<std::size_t>(c - r)], -u,
                                     cf.delta, cf.alpha);
    CHECK(std::abs(qm[3] + std::conj(qp[3])) < 1e-12 * std::max(1.0, std::abs(qp[3])));
    CHECK(std::abs(qm[2] - std::conj(qp[2])) < 1e-12 * std::max(1.0, std::abs(qp[2])));
  }
}

TEST_CASE("spectral kernel against a dense-quadrature oracle on degenerate data") {
  // All-zero data: ecf = 1, so Q2 = (2-a)/2 and Q3 = u(1-a)/2 in closed form.
  const std::vector<double> data(20, 0.0);
  const double h = 0.2, alpha = 0.5;
  SpectralGrid grid{h, 4097};
  const CfTable cf = CfTable::from_sample(data, grid, 0.01, alpha);
  const SmoothingKernel w;

  const std::vector<double> zs{1.0};
  const cd k2 = spectral_kernel(2, zs, cf, w, h)[0];
  const cd k3 = spectral_kernel(3, zs, cf, w, h)[0];

  const double z = 1.0;
  const cd i{0.0, 1.0};
  const cd oracle_k2 = -(2.0 - alpha) / 2.0 / (2.0 * std::numbers::pi) *
    oracle::simpson([&](double u) { return std::exp(-i * u * z) * flat_top_fourier(u * h, 0.5); },
                    -1.0 / h, 1.0 / h, 200000);
  const cd oracle_k3 = -(1.0 - alpha) / 2.0 / (2.0 * std::numbers::pi) *
    oracle::simpson([&](double u) { return u * std::exp(-i * u * z) * flat_top_fourier(u * h, 0.5); },
                    -1.0 / h, 1.0 / h, 200000);

  CHECK(std::abs(k2 - oracle_k2) < 1e-8);
  CHECK(std::abs(k3 - oracle_k3) < 1e-8);
  // structure: K2 real, K3 purely imaginary and odd
  CHECK(std::fabs(k2.imag()) < 1e-12);
  CHECK(std::fabs(k3.real()) < 1e-12);
  const cd k3neg = spectral_kernel(3, std::vector<double>{-1.0}, cf, w, h)[0];
  CHECK(std::abs(k3neg + k3) < 1e-12);
}

TEST_CASE("degenerate smoothing kernel gives a zero transform") {
  const std::vector<double> data = sample_data(50, 2);
  SpectralGrid grid{0.2, 257};
  const CfTable cf = CfTable::from_sample(data, grid, 0.02, 0.5);
  SmoothingKernel w;
  w.fourier_override = [](double) { return 0.0; };
  const auto k = spectral_kernel(1, std::vector<double>{0.3, 1.0}, cf, w, 0.2);
  CHECK(std::abs(k[0]) == 0.0);
  CHECK(std::abs(k[1]) == 0.0);
}

TEST_CASE("doubling the grid size moves the kernels by less than 1e-6") {
  const std::vector<double> data = sample_data(400, 99);
  const double h = 0.15, delta = 0.02;
  const std::vector<double> zs{-2.0, -0.5, 0.0, 0.7, 1.9};
  SpectralGrid coarse{h, 4097}, fine{h, 8193};
  const CfTable cf1 = CfTable::from_sample(data, coarse, delta, 0.5);
  const CfTable cf2 = CfTable::from_sample(data, fine, delta, 0.5);
  const SmoothingKernel w;
  for (int m = 0; m <= 3; ++m) {
    const auto a = spectral_kernel(m, zs, cf1, w, h);
    const auto b = spectral_kernel(m, zs, cf2, w, h);
    double sup = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      sup = std::max(sup, std::abs(a[i] - b[i]));
      scale = std::max(scale, std::abs(b[i]));
    }
    CHECK(sup <= 1e-6 * std::max(1.0, scale));
  }
}

TEST_CASE("Plancherel identity for the spectral kernels") {
  const std::vector<double> data = sample_data(500, 12);
  const double h = 0.15, delta = 0.02, alpha = 0.5;
  SpectralGrid grid{h, 4097};
  const CfTable cf = CfTable::from_sample(data, grid, delta, alpha);
  const SmoothingKernel w;

  const double z_hi = 60.0, dz = h / 10.0;
  std::vector<double> zs;
  for (double z = -z_hi; z <= z_hi; z += dz) zs.push_back(z);

  for (int m = 0; m <= 3; ++m) {
    const auto kv = spectral_kernel(m, zs, cf, w, h);
    double lhs = 0.0;
    for (const cd& v : kv) lhs += std::norm(v) * dz;

    double rhs = 0.0;
    const double du = grid.spacing();
    for (int k = 0; k < grid.size; ++k) {
      const double u = grid.node(k);
      const double taper = w.fourier(u * h);
      if (taper == 0.0) continue;
      const auto q = spectral_weights(cf.nodes[static_cast<std::size_t>(k)], u, delta, alpha);
      rhs += std::norm(q[static_cast<std::size_t>(m)] * taper) * du;
    }
    rhs /= 2.0 * std::numbers::pi;
    CHECK(std::fabs(lhs - rhs) <= 1e-3 * rhs);
  }
}

TEST_CASE("stability floor reports the offending frequency") {
  // wide-spread data: |ecf| decays fast, so a large frequency range trips the floor
  Rng rng(3);
  std::vector<double> data(2000);
  for (auto& x : data) x = 3.0 * rng.normal();
  SpectralGrid grid{0.1, 513};
  const CfTable cf = CfTable::from_sample(data, grid, 0.05, 0.5);
  CHECK(cf.valid_radius < grid.center());
  CHECK_THROWS_AS(cf.require_coverage(grid.u_max()), BandwidthTooSmallError);
  CHECK_NOTHROW(cf.require_coverage(0.3));
}

TEST_CASE("kernel table interpolation matches direct evaluation") {
  const std::vector<double> data = sample_data(300, 64);
  const double h = 0.2;
  SpectralGrid grid{h, 2049};
  const CfTable cf = CfTable::from_sample(data, grid, 0.02, 0.5);
  const SmoothingKernel w;
  const SpectralKernelTable tab = SpectralKernelTable::build(cf, w, h, -3.0, 3.0);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const double z = 6.0 * (rng.uniform() - 0.5);
    for (int m = 0; m <= 3; ++m) {
      const cd direct = spectral_kernel(m, std::vector<double>{z}, cf, w, h)[0];
      CHECK(std::abs(tab.eval(m, z) - direct) < 1e-7 * std::max(1.0, std::abs(direct)));
    }
  }
}
