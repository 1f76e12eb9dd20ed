#include "dbar/domain.hpp"

#include <cmath>
#include <random>

namespace dbar {

double smoothstep7(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  double t4 = t * t * t * t;
  return t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

double exp_step(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

SpecialLipschitzDomain flat_domain(int N) {
  SpecialLipschitzDomain d;
  d.N = N;
  d.rho = [](const std::vector<double>&) { return 0.0; };
  d.lip_bound = 0.0;
  return d;
}

SpecialLipschitzDomain sine_domain(int N, double a) {
  SpecialLipschitzDomain d;
  d.N = N;
  d.rho = [a](const std::vector<double>& xp) { return a * std::sin(xp[0]); };
  d.lip_bound = 2.0 * std::abs(a);
  return d;
}

double delta(const SpecialLipschitzDomain& dom, const std::vector<double>& x) {
  return std::abs(x.back() - dom.graph(x));
}

double sampled_lip(const SpecialLipschitzDomain& dom, double box, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::uniform_real_distribution<double> st(1e-4, 0.2);
  int m = dom.N - 1;
  double sup = 0, quot = 0;
  std::vector<double> a(m), b(m);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < m; ++i) a[i] = u(rng);
    double ra = dom.rho(a);
    sup = std::max(sup, std::abs(ra));
    double len = 0;
    for (int i = 0; i < m; ++i) {
      b[i] = a[i] + st(rng) * (rng() % 2 ? 1 : -1);
      len += (b[i] - a[i]) * (b[i] - a[i]);
    }
    quot = std::max(quot, std::abs(dom.rho(b) - ra) / std::sqrt(len));
  }
  return sup + quot;
}

StripIndex strip_of(const SpecialLipschitzDomain& dom, const std::vector<double>& x) {
  double d = x.back() - dom.graph(x);
  if (d == 0) throw std::runtime_error("strip_of: point on the boundary graph");
  double l = -std::log2(std::abs(d));
  int k = (int)std::lround(l);
  if (std::abs(l - double(k)) >= 0.5 - 1e-12)
    throw std::runtime_error("strip_of: point on a strip edge (measure-zero ambiguity)");
  StripIndex out;
  out.k = k;
  out.is_inside = d > 0;
  return out;
}

double delta(const BallDomain&, const std::vector<double>& x) {
  double r = 0;
  for (double v : x) r += v * v;
  return std::abs(1.0 - std::sqrt(r));
}

// radial profile of the cap graph in units of kappa; s = |y'|/(kappa lambda)
static double cap_profile(double s) {
  const double sc = std::sin(68.0 * M_PI / 180.0);
  const double sf = 1.05;
  const double D = sc / std::sqrt(1.0 - sc * sc);  // tan 68 deg
  if (s <= sc) return 1.0 - std::sqrt(1.0 - s * s);
  double t = (s - sc) / (sf - sc);
  double Q;
  if (t >= 1.0) Q = 0.5;
  else {
    double t5 = t * t * t * t * t;
    Q = t - t5 * (7.0 - 14.0 * t + 10.0 * t * t - 2.5 * t * t * t);
  }
  return 1.0 - std::sqrt(1.0 - sc * sc) + D * (sf - sc) * Q;
}

std::vector<double> BallChart::to_chart(const std::vector<double>& x) const {
  int N = (int)x.size();
  // u = R x: move component `axis` (times sign) to the last slot
  std::vector<double> u;
  for (int i = 0; i < N; ++i)
    if (i != axis) u.push_back(x[i]);
  u.push_back(sign * x[axis]);
  std::vector<double> y(N);
  for (int i = 0; i < N - 1; ++i) y[i] = kappa * lambda * u[i];
  y[N - 1] = kappa * (1.0 - u[N - 1]);
  return y;
}

std::vector<double> BallChart::from_chart(const std::vector<double>& y) const {
  int N = (int)y.size();
  std::vector<double> u(N);
  for (int i = 0; i < N - 1; ++i) u[i] = y[i] / (kappa * lambda);
  u[N - 1] = 1.0 - y[N - 1] / kappa;
  std::vector<double> x(N);
  int j = 0;
  for (int i = 0; i < N; ++i) {
    if (i == axis) continue;
    x[i] = u[j++];
  }
  x[axis] = sign * u[N - 1];
  return x;
}

// wide C-infinity ramps: the global extension has to resolve these cutoffs on
// the chart lattices, and its reconstruction error is driven by their spectra
static double ang_profile(double theta_deg) {
  // ramp ends inside the chart membership cone (67 deg); it starts late
  // enough that the worst-case direction equidistant from four cap axes
  // (58.8 deg) still has normalization sum well above 1/2
  return 1.0 - exp_step((theta_deg - 52.0) / 15.0);
}

static double rad_profile(double r) {
  return exp_step((r - 0.55) / 0.30) * (1.0 - exp_step((r - 1.02) / 0.18));
}

double BallAtlas::beta0(const std::vector<double>& x) const {
  double r = 0;
  for (double v : x) r += v * v;
  r = std::sqrt(r);
  return 1.0 - exp_step((r - 0.55) / 0.40);
}

// outer bump entering only the normalization sum: keeps T bounded below on the
// closed supports of the beta_nu so every chi_nu vanishes smoothly at its edge
double BallAtlas::beta_out(const std::vector<double>& x) const {
  double r = 0;
  for (double v : x) r += v * v;
  r = std::sqrt(r);
  return exp_step((r - 1.04) / 0.10);
}

double BallAtlas::beta(int nu, const std::vector<double>& x) const {
  const BallChart& ch = charts[nu];
  double r = 0;
  for (double v : x) r += v * v;
  r = std::sqrt(r);
  if (r == 0) return 0;
  if (r <= 0.55 || r >= 1.20) return 0;  // rad_profile support
  double c = ch.sign * x[ch.axis] / r;
  if (c <= std::cos(67.0 * M_PI / 180.0)) return 0;  // ang_profile support
  if (c > 1) c = 1;
  double theta = std::acos(c) * 180.0 / M_PI;
  return ang_profile(theta) * rad_profile(r);
}

double BallAtlas::cover(const std::vector<double>& x) const {
  double b0 = beta0(x), bo = beta_out(x);
  double T = b0 * b0 + bo * bo;
  for (int nu = 0; nu < (int)charts.size(); ++nu) {
    double b = beta(nu, x);
    T += b * b;
  }
  return T;
}

double BallAtlas::chi0(const std::vector<double>& x) const {
  double T = cover(x);
  if (T <= 0) return 0;
  double b0 = beta0(x);
  return b0 * b0 / T;
}

double BallAtlas::chi(int nu, const std::vector<double>& x) const {
  double b = beta(nu, x);
  if (b <= 0) return 0;  // skip the full normalization sum off the bump support
  double T = cover(x);
  if (T <= 0) return 0;
  return b / std::sqrt(T);
}

void BallAtlas::chi_all(const std::vector<double>& x, double& c0, std::vector<double>& cv) const {
  int nch = (int)charts.size();
  cv.assign(nch, 0.0);
  double b0 = beta0(x), bo = beta_out(x);
  double T = b0 * b0 + bo * bo;
  std::vector<double> bv(nch);
  for (int nu = 0; nu < nch; ++nu) {
    bv[nu] = beta(nu, x);
    T += bv[nu] * bv[nu];
  }
  if (T <= 0) {
    c0 = 0;
    return;
  }
  c0 = b0 * b0 / T;
  double rT = 1.0 / std::sqrt(T);
  for (int nu = 0; nu < nch; ++nu) cv[nu] = bv[nu] * rT;
}

BallAtlas build_atlas(const BallDomain& ball, int M) {
  int N = 2 * ball.n;
  if (M < 2 * N)
    throw std::runtime_error("refinement request: atlas needs " + std::to_string(2 * N) +
                             " caps for n = " + std::to_string(ball.n));
  BallAtlas atlas;
  atlas.ball = ball;
  for (int axis = 0; axis < N; ++axis)
    for (int sign : {1, -1}) {
      BallChart ch;
      ch.axis = axis;
      ch.sign = sign;
      double kl = ch.kappa * ch.lambda;
      ch.omega.N = N;
      double kap = ch.kappa;
      ch.omega.rho = [kl, kap](const std::vector<double>& yp) {
        double s = 0;
        for (double v : yp) s += v * v;
        s = std::sqrt(s) / kl;
        return kap * cap_profile(s);
      };
      // sup|rho| = kappa * sup(profile), slope = tan(68 deg)/lambda = 0.45
      const double sc = std::sin(68.0 * M_PI / 180.0);
      double sup_rho = kap * (1.0 - std::sqrt(1.0 - sc * sc) +
                              sc / std::sqrt(1.0 - sc * sc) * (1.05 - sc) * 0.5);
      ch.omega.lip_bound = sup_rho + 0.45;
      atlas.charts.push_back(ch);
    }
  return atlas;
}

BoundaryChart boundary_chart(const BallDomain& ball, const std::vector<double>& z) {
  if (ball.n != 2) throw std::runtime_error("boundary_chart: implemented for n = 2");
  BoundaryChart ch;
  ch.z = z;
  return ch;
}

BoundaryChart::Coords BoundaryChart::eval(const std::vector<double>& zeta) const {
  int n = (int)z.size() / 2;
  std::vector<cd> zc(n), wc(n);
  for (int j = 0; j < n; ++j) {
    zc[j] = cd(z[2 * j], z[2 * j + 1]);
    wc[j] = cd(zeta[2 * j], zeta[2 * j + 1]);
  }
  Coords out;
  double r2 = 0;
  for (int j = 0; j < n; ++j) r2 += std::norm(wc[j]);
  out.s1 = r2 - 1.0;
  cd s(0);
  for (int j = 0; j < n; ++j) s += std::conj(wc[j]) * (wc[j] - zc[j]);
  out.s2 = s.imag();
  // transverse part: components of zeta - z orthogonal to the complex normal
  double zn = 0;
  for (int j = 0; j < n; ++j) zn += std::norm(zc[j]);
  zn = std::sqrt(zn);
  cd n1 = zc[0] / zn, n2 = zc[1] / zn;  // complex normal
  cd m1 = -std::conj(n2), m2 = std::conj(n1);  // orthogonal complex direction
  cd tt = std::conj(m1) * (wc[0] - zc[0]) + std::conj(m2) * (wc[1] - zc[1]);
  out.t = {tt.real(), tt.imag()};
  return out;
}

}  // namespace dbar
