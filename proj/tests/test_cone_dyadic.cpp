#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dbar/cone.hpp"
#include "dbar/fd.hpp"

using namespace dbar;

static ConeParams cert_params() {
  ConeParams p;
  p.N = 2;
  p.d0 = 1.05;
  p.L = 9.0;
  p.K_tot = 8;
  p.slope = 0.3;
  p.h = {1.0 / 16, 1.0 / 16};
  p.J_max = 8;
  p.tail_eps = 1e-8;
  return p;
}

static const ConeDyadicPair& cert_pair() {
  static ConeDyadicPair pair = build_pair(cert_params());
  return pair;
}

TEST_CASE("theta maps the orthant into the cone; bad maps are rejected") {
  auto p = cert_params();
  auto T = theta_map(p.N, p.d0, p.slope);
  auto x = apply_matrix(T, {0.0, -p.d0});  // apex preimage
  CHECK(std::abs(x[0] - 1.0) < 1e-12);
  CHECK(std::abs(x[1] - 1.0) < 1e-12);
  // identity map sends the orthant nowhere near the lower cone
  std::vector<std::vector<double>> bad = {{1, 0}, {0, 1}};
  CHECK_THROWS(build_phi0(p, bad));
}

TEST_CASE("phi0: unit mass, vanishing moments, one-sided support") {
  const auto& pair = cert_pair();
  CHECK(std::abs(discrete_moment(pair.phi0, {0, 0}) - 1.0) < 1e-12);
  double l1 = 0;
  for (auto& z : pair.phi0.v) l1 += std::abs(z);
  l1 *= pair.phi0.grid.cell_volume();
  for (int k = 1; k <= 4; ++k)
    for (auto& a : derivative_multi_indices(2, k))
      CHECK(std::abs(discrete_moment(pair.phi0, a)) < 1e-5 * l1);
  CHECK(mass_above(pair.phi0, -1.0) == 0.0);
  CHECK(mass_above(pair.phi0, -pair.prm.d0 + 1e-9) == 0.0);
}

TEST_CASE("phi1 and psi1: vanishing moments up to order 4") {
  const auto& pair = cert_pair();
  for (const SampledField* f : {&pair.phi1, &pair.psi1}) {
    double l1 = 0;
    for (auto& z : f->v) l1 += std::abs(z);
    l1 *= f->grid.cell_volume();
    for (int k = 0; k <= 4; ++k)
      for (auto& a : derivative_multi_indices(2, k))
        CHECK(std::abs(discrete_moment(*f, a)) < 1e-5 * l1);
  }
}

TEST_CASE("support depths: psi_1 stays below -1/2, psi_0 below -1") {
  const auto& pair = cert_pair();
  CHECK(mass_above(pair.psi1, -0.5) <= pair.prm.tail_eps);
  CHECK(mass_above(pair.psi0, -1.0) <= pair.prm.tail_eps);
  CHECK(mass_above(pair.phi1, -pair.prm.d0 / 2 + 1e-9) == 0.0);
}

TEST_CASE("partial sums telescope to 2 M^2 - M^4 and equal 1 at xi = 0") {
  const auto& pair = cert_pair();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xi = {u(rng), u(rng)};
    for (int J : {0, 2, 5}) {
      // relative tolerance: intermediate symbols reach |M|^4 before cancelling
      double big = 1.0;
      for (int j = 0; j <= J; ++j) {
        double m = std::abs(pair.symbol_A({xi[0] * std::pow(2.0, -j), xi[1] * std::pow(2.0, -j)}));
        big = std::max(big, m * m * m * m);
      }
      cd m = pair.symbol_A({xi[0] * std::pow(2.0, -J), xi[1] * std::pow(2.0, -J)});
      cd closed = 2.0 * m * m - m * m * m * m;
      CHECK(std::abs(pair.partial_sum(J, xi) - closed) < 1e-13 * big);
    }
  }
  for (int J : {0, 1, 4, 8}) CHECK(std::abs(pair.partial_sum(J, {0.0, 0.0}) - 1.0) < 1e-13);
}

TEST_CASE("psi_hat_1 nearly vanishes at low frequency") {
  const auto& pair = cert_pair();
  for (double r : {0.01, 0.03, 0.05})
    for (double ang = 0; ang < 6.28; ang += 0.7) {
      std::vector<double> xi = {r * std::cos(ang), r * std::sin(ang)};
      CHECK(std::abs(pair.symbol_psi(1, xi)) <= 1e-4);
    }
}

TEST_CASE("spatial psi1 matches its symbol formula") {
  const auto& pair = cert_pair();
  for (auto& xi : std::vector<std::vector<double>>{{0.3, -0.7}, {1.1, 0.4}, {-2.0, 1.5}})
    CHECK(std::abs(dtft(pair.psi1, xi) - pair.symbol_psi(1, xi)) < 1e-8);
}

TEST_CASE("reconstruction error decreases in J and is below 1e-3 at J = 8") {
  const auto& pair = cert_pair();
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> freqs;
  std::vector<cd> coeffs;
  for (int m = 0; m < 12; ++m) {
    freqs.push_back({2.0 * u(rng), 2.0 * u(rng)});
    coeffs.push_back(cd(u(rng), u(rng)));
  }
  double prev = 1e300;
  for (int J = 2; J <= 8; ++J) {
    double e = reconstruction_error(pair, J, freqs, coeffs, 200, 5);
    CHECK(e <= prev * 1.01 + 1e-15);
    prev = e;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("scaling consistency: phi2 two ways agree") {
  const auto& pair = cert_pair();
  SampledField a = dilate_measure(pair.phi1, 1);
  SampledField b = combine(dilate_measure(pair.phi0, 2), 1.0,
                           refine_lattice(dilate_measure(pair.phi0, 1), 2), -1.0);
  SampledField diff = combine(a, 1.0, b, -1.0);
  CHECK(diff.max_abs() < 1e-10 * std::max(1.0, a.max_abs()));
}
