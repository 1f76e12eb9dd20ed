#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dbar/domain.hpp"

using namespace dbar;

TEST_CASE("delta: ball center, flat graph, sine graph vs brute force") {
  BallDomain ball;
  CHECK(delta(ball, {0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(delta(ball, {0.5, 0, 0, 0}) == doctest::Approx(0.5));

  auto flat = flat_domain(2);
  CHECK(delta(flat, {3.0, 0.7}) == doctest::Approx(0.7));

  auto dom = sine_domain(2, 0.15);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int s = 0; s < 200; ++s) {
    std::vector<double> x = {u(rng), u(rng)};
    if (std::abs(x[1] - dom.graph(x)) < 1e-3) continue;
    // brute-force distance to a dense boundary sample
    double best = 1e300;
    for (double t = x[0] - 3; t <= x[0] + 3; t += 1e-3) {
      double dx = t - x[0], dy = 0.15 * std::sin(t) - x[1];
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    double d = delta(dom, x);
    CHECK(d >= best * 0.999);
    CHECK(d <= 2.0 * best * 1.001);
  }
}

TEST_CASE("sampled Lipschitz certificate") {
  auto dom = sine_domain(2, 0.15);
  double l = sampled_lip(dom, 3.0, 5000, 11);
  CHECK(l <= dom.lip_bound + 1e-6);
  CHECK(dom.lip_bound < 0.5);
}

TEST_CASE("strip_of: dyadic examples and edge handling") {
  auto flat = flat_domain(2);
  auto s = strip_of(flat, {0.0, 1.0});
  CHECK(s.k == 0);
  CHECK(s.is_inside);
  s = strip_of(flat, {0.0, -1.0});
  CHECK(s.k == 0);
  CHECK(!s.is_inside);
  s = strip_of(flat, {0.0, 0.125});
  CHECK(s.k == 3);
  CHECK(s.is_inside);
  CHECK_THROWS(strip_of(flat, {0.0, 0.0}));
  CHECK_THROWS(strip_of(flat, {0.0, std::sqrt(0.5)}));  // exact strip edge
}

TEST_CASE("strips: uniqueness and delta equivalence on random points") {
  auto dom = sine_domain(2, 0.15);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-4, 4);
  int checked = 0;
  for (int t = 0; t < 100000; ++t) {
    std::vector<double> x = {u(rng), u(rng)};
    double d = x[1] - dom.graph(x);
    if (d == 0) continue;
    StripIndex s;
    try {
      s = strip_of(dom, x);
    } catch (...) {
      continue;  // measure-zero edge
    }
    ++checked;
    double ad = std::abs(d);
    // claimed strip contains the point...
    CHECK(ad > std::pow(2.0, -0.5 - s.k));
    CHECK(ad < std::pow(2.0, 0.5 - s.k));
    // ...and neighbours do not (uniqueness)
    CHECK(!(ad > std::pow(2.0, -0.5 - (s.k + 1)) && ad < std::pow(2.0, 0.5 - (s.k + 1))));
    // delta ~ 2^{-k} within a factor 2
    CHECK(ad >= std::pow(2.0, -1.0 - s.k));
    CHECK(ad <= std::pow(2.0, 1.0 - s.k));
    CHECK(s.is_inside == (d > 0));
  }
  CHECK(checked > 99000);
}

static std::vector<double> rand_dir(std::mt19937& rng, int N) {
  std::normal_distribution<double> g(0, 1);
  std::vector<double> x(N);
  double r = 0;
  for (int i = 0; i < N; ++i) {
    x[i] = g(rng);
    r += x[i] * x[i];
  }
  r = std::sqrt(r);
  for (auto& v : x) v /= r;
  return x;
}

TEST_CASE("atlas: partition identity, coverage, chart bounds") {
  BallDomain ball;
  CHECK_THROWS(build_atlas(ball, 4));  // too few caps for n = 2
  BallAtlas atlas = build_atlas(ball, 8);
  CHECK(atlas.charts.size() == 8);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> ur(0, 1.25);
  for (int t = 0; t < 10000; ++t) {
    auto x = rand_dir(rng, 4);
    double r = ur(rng);
    for (auto& v : x) v *= r;
    CHECK(atlas.cover(x) > 0.5);
    if (r > 1.03) continue;  // outer normalization bump active beyond 1.04
    double c0;
    std::vector<double> cv;
    atlas.chi_all(x, c0, cv);
    double sum = c0;
    for (int nu = 0; nu < 8; ++nu) {
      CHECK(std::abs(cv[nu] - atlas.chi(nu, x)) <= 1e-14);
      sum += cv[nu] * cv[nu];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
  }
  // chi0 is identically 1 deep inside; every chi_nu vanishes beyond r = 1.21
  for (int t = 0; t < 100; ++t) {
    auto x = rand_dir(rng, 4);
    for (auto& v : x) v *= 0.54 * ur(rng) / 1.25;
    CHECK(atlas.chi0(x) == doctest::Approx(1.0).epsilon(1e-12));
    auto far = rand_dir(rng, 4);
    for (auto& v : far) v *= 1.21 + ur(rng);
    CHECK(atlas.chi0(far) == 0.0);
    for (int nu = 0; nu < 8; ++nu) CHECK(atlas.chi(nu, far) == 0.0);
  }
  // each chart's graph domain is honestly Lipschitz with margin
  for (auto& ch : atlas.charts) {
    CHECK(ch.omega.lip_bound < 0.5);
    double l = sampled_lip(ch.omega, ch.kappa * ch.lambda * 1.2, 4000, 7);
    CHECK(l <= ch.omega.lip_bound + 1e-6);
  }
}

TEST_CASE("atlas charts: membership matches the ball inside the cap range") {
  BallDomain ball;
  BallAtlas atlas = build_atlas(ball, 8);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  const BallChart& ch = atlas.charts[0];
  double kl = ch.kappa * ch.lambda;
  double smax = kl * std::sin(67.0 * M_PI / 180.0);
  int inside_count = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> y(4);
    double norm = 0;
    for (int i = 0; i < 3; ++i) {
      y[i] = smax * u(rng);
      norm += y[i] * y[i];
    }
    if (std::sqrt(norm) > smax) {
      --t;
      continue;  // stay within the cap's angular range
    }
    y[3] = ch.kappa * (0.5 * u(rng) + 0.35);  // straddles the graph
    auto x = ch.from_chart(y);
    bool in_ball = ball.inside(x);
    bool in_graph = ch.omega.inside(y);
    CHECK(in_ball == in_graph);
    if (in_ball) ++inside_count;
    // round trip
    auto y2 = ch.to_chart(x);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(y2[i] - y[i]) < 1e-12);
  }
  CHECK(inside_count > 1000);
  CHECK(inside_count < 9000);
}

TEST_CASE("boundary chart: s1 comparable to delta outside") {
  BallDomain ball;
  std::vector<double> z = {1.1, 0, 0, 0};
  auto ch = boundary_chart(ball, z);
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> zeta = {1.0 + 0.2 * std::abs(u(rng)) + 1e-4, u(rng), u(rng), u(rng)};
    auto c = ch.eval(zeta);
    double d = delta(ball, zeta);
    CHECK(c.s1 >= d * 0.99);
    CHECK(c.s1 <= 3.0 * d);
  }
  // s2 and t vanish at zeta = z
  auto c0 = ch.eval(z);
  CHECK(std::abs(c0.s2) < 1e-14);
  CHECK(std::abs(c0.t[0]) < 1e-14);
  CHECK(std::abs(c0.t[1]) < 1e-14);
}
