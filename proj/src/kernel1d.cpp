#include "dbar/kernel1d.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace dbar {

static const double kSqrt2 = std::sqrt(2.0);
static const double kG0 = std::exp(-2.0 * std::cos(M_PI / 8.0));  // G(0)

double eval_g(double t) {
  if (t - 1.0 < 1e-12) return 0.0;  // supp g in [1, oo); flat at t = 1
  double r = std::pow(t - 1.0, 0.125);
  double a = (r + 1.0 / r) / kSqrt2;
  double b = (r - 1.0 / r) / kSqrt2;
  if (a > 700.0) return 0.0;
  return std::exp(-a) * std::sin(b) / (2.0 * M_PI * kG0 * t);
}

template <typename T, typename F>
static T simpson_rec(const F& f, T a, T b, T fa, T fm, T fb, T whole, T tol, int depth) {
  T m = (a + b) / 2;
  T lm = (a + m) / 2, rm = (m + b) / 2;
  T flm = f(lm), frm = f(rm);
  T left = (m - a) / 6 * (fa + 4 * flm + fm);
  T right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

template <typename T, typename F>
static T adaptive_simpson(const F& f, T a, T b, T tol) {
  T m = (a + b) / 2;
  T fa = f(a), fm = f(m), fb = f(b);
  T whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

double g_integral(double T, double tol) {
  if (T <= 1.0) return 0.0;
  // substitute t = 1 + s^8: integrand 8 s^7 g(1+s^8), smooth and e^{-s/sqrt2}
  double s_hi = std::pow(T - 1.0, 0.125);
  auto f = [](double s) {
    if (s < 1e-6) return 0.0;  // e^{-1/(s sqrt2)} underflows anyway
    return 8.0 * std::pow(s, 7) * eval_g(1.0 + std::pow(s, 8));
  };
  // split at the hump to help the recursion
  double mid = std::min(4.0, s_hi);
  return adaptive_simpson(f, 0.0, mid, tol / 2) +
         (s_hi > mid ? adaptive_simpson(f, mid, s_hi, tol / 2) : 0.0);
}

double g_moment(int k) {
  // moment_k = -(8/(2 pi G0)) Im int_0^oo (1+s^8)^{k-1} s^7
  //            exp(-s e^{i pi/4} - e^{-i pi/4}/s) ds.
  // Rotate to s = u e^{-i pi/4}: the integrand times ds is the real quantity
  // (1+u^8)^{k-1} u^7 e^{-u-1/u} du, so Im vanishes; the rotation crosses the
  // pole of (1+s^8)^{-1} at s0 = e^{-i pi/8} only when k = 0.
  if (k >= 1) return 0.0;
  std::complex<double> s0 = std::polar(1.0, -M_PI / 8.0);
  std::complex<double> i14 = std::polar(1.0, M_PI / 4.0);
  std::complex<double> res = std::exp(-s0 * i14 - std::conj(i14) / s0) / 8.0;
  // closed contour is clockwise: int_real = int_ray - 2 pi i res
  // moment_0 = -(8/(2 pi G0)) Im(-2 pi i res) = (8/G0) Re(res)
  return 8.0 / kG0 * res.real();
}

double g_moment_phase_residual(int k) {
  std::complex<double> rot = std::polar(1.0, -M_PI / 4.0);
  std::complex<double> i14 = std::polar(1.0, M_PI / 4.0);
  double worst = 0;
  for (int i = 1; i <= 400; ++i) {
    double u = 0.05 * i;  // covers the mass of every k <= 8 hump's phase
    std::complex<double> s = u * rot;
    std::complex<double> val = std::pow(1.0 + std::pow(s, 8), k - 1) * std::pow(s, 7) *
                               std::exp(-s * i14 - std::conj(i14) / s) * rot;
    double mag = std::abs(val);
    if (mag > 0) worst = std::max(worst, std::abs(val.imag()) / mag);
  }
  return worst;
}

double g_moment1_direct(double T) {
  // int t g dt; the 1/t in g cancels one power so the substituted integrand is
  // 8 s^7 e^{-(s+1/s)/sqrt2} sin((s-1/s)/sqrt2) / (2 pi G0): amplitude ~1e5,
  // still leaves enough digits for a 1e-5 verdict in long double.
  long double sq2 = sqrtl(2.0L);
  long double g0 = expl(-2.0L * cosl((long double)M_PI / 8.0L));
  auto f = [&](long double s) -> long double {
    if (s < 1e-6L) return 0.0L;
    long double a = (s + 1 / s) / sq2, b = (s - 1 / s) / sq2;
    if (a > 11000.0L) return 0.0L;
    return 8.0L * powl(s, 7) * expl(-a) * sinl(b) / (2.0L * (long double)M_PI * g0);
  };
  // the t factor pushes the hump out to s ~ 60, i.e. t ~ 60^8 = 1.7e14
  long double s_hi = std::max(powl((long double)T - 1, 0.125L), 120.0L);
  long double out = 0;
  for (long double a = 0; a < s_hi; a += 10) {
    long double b = std::min(a + 10, s_hi);
    out += adaptive_simpson(f, a, b, (long double)1e-12L);
  }
  return (double)out;
}

double g_bump(double t, double L) {
  if (t <= 1.0 || t >= L) return 0.0;
  return std::exp(-1.0 / (t - 1.0) - 1.0 / (L - t));
}

}  // namespace dbar
