#include "dbar/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dbar/extension.hpp"
#include "dbar/fd.hpp"
#include "dbar/fft.hpp"

namespace dbar {

double FourierLPFamily::phi0_hat(double r) const {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return 1.0 - smoothstep7(r - 1.0);
}

double FourierLPFamily::level_hat(int j, double r) const {
  if (j == 0) return phi0_hat(r);
  return phi0_hat(std::ldexp(r, -j)) - phi0_hat(std::ldexp(r, -j + 1));
}

std::string NormReport::csv_row() const {
  char buf[160];
  double h0 = grid.N > 0 ? grid.h[0] : 0;
  snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%d,%.6g,%.17g", kind.c_str(), s, p, J, h0, value);
  return buf;
}

// signed frequency (cycles per unit) of bin k on axis a
static double bin_freq(const GridSpec& g, int a, int64_t k) {
  int64_t n = g.shape[a];
  int64_t ks = (2 * k <= n) ? k : k - n;
  return double(ks) / (double(n) * g.h[a]);
}

// the dyadic bands live on angular frequency (so that the 2^{js} weights
// track the multiplier (1 + 4 pi^2 |xi|^2)^{s/2} band by band)
static double angular_r(const GridSpec& g, const std::vector<int64_t>& idx) {
  double r2 = 0;
  for (int a = 0; a < g.N; ++a) {
    double xi = bin_freq(g, a, idx[a]);
    r2 += xi * xi;
  }
  return 2.0 * M_PI * std::sqrt(r2);
}

static void check_decay(const SampledField& f) {
  double mx = f.max_abs();
  if (mx == 0) return;
  double edge = 0;
  std::vector<int64_t> idx;
  for (int64_t i = 0; i < (int64_t)f.v.size(); ++i) {
    f.grid.unflatten(i, idx);
    bool face = false;
    for (int a = 0; a < f.grid.N && !face; ++a)
      face = idx[a] == 0 || idx[a] == f.grid.shape[a] - 1;
    if (face) edge = std::max(edge, std::abs(f.v[i]));
  }
  if (edge > 1e-8 * mx)
    throw std::runtime_error("windowing error: insufficient decay at the box boundary");
}

NormReport lp_norm_RN(const SampledField& f, double s, double p, const FourierLPFamily& fam) {
  if (!(p > 1.0)) throw std::invalid_argument("lp_norm_RN: need 1 < p < inf");
  check_decay(f);
  const GridSpec& g = f.grid;
  int64_t nn = g.size();
  std::vector<cd> spec = f.v;
  fft(spec, g.shape, -1);
  std::vector<double> sq(nn, 0.0);
  std::vector<cd> buf(nn);
  std::vector<int64_t> idx;
  // square-normalized multipliers g_j = phi_j / sqrt(sum_k phi_k^2) so the
  // bands form an exact square partition; inhomogeneous weights (1 + 4^j)^s
  // track (1 + |2 pi xi|^2)^s at the band centers
  std::vector<double> rr(nn), nrm(nn, 0.0);
  for (int64_t i = 0; i < nn; ++i) {
    g.unflatten(i, idx);
    rr[i] = angular_r(g, idx);
    for (int j = 0; j <= fam.J; ++j) {
      double v = fam.level_hat(j, rr[i]);
      nrm[i] += v * v;
    }
    nrm[i] = nrm[i] > 0 ? 1.0 / std::sqrt(nrm[i]) : 0.0;
  }
  for (int j = 0; j <= fam.J; ++j) {
    double w = std::pow(1.0 + std::ldexp(1.0, 2 * j), s);
    for (int64_t i = 0; i < nn; ++i)
      buf[i] = spec[i] * (fam.level_hat(j, rr[i]) * nrm[i]);
    fft(buf, g.shape, +1);
    double inv = 1.0 / double(nn);
    for (int64_t i = 0; i < nn; ++i) sq[i] += w * std::norm(buf[i] * inv);
  }
  double acc = 0, cv = g.cell_volume();
  for (int64_t i = 0; i < nn; ++i) acc += std::pow(sq[i], 0.5 * p) * cv;
  NormReport r;
  r.kind = "H^{s,p}";
  r.value = std::pow(acc, 1.0 / p);
  r.s = s;
  r.p = p;
  r.J = fam.J;
  r.grid = g;
  return r;
}

NormReport multiplier_hs_norm(const SampledField& f, double s) {
  const GridSpec& g = f.grid;
  int64_t nn = g.size();
  std::vector<cd> spec = f.v;
  fft(spec, g.shape, -1);
  std::vector<int64_t> idx;
  double acc = 0, cv = g.cell_volume();
  for (int64_t i = 0; i < nn; ++i) {
    g.unflatten(i, idx);
    double r2 = 0;
    for (int a = 0; a < g.N; ++a) {
      double xi = bin_freq(g, a, idx[a]);
      r2 += xi * xi;
    }
    double m = std::pow(1.0 + 4.0 * M_PI * M_PI * r2, s);
    acc += m * std::norm(spec[i]) * cv / double(nn);
  }
  NormReport r;
  r.kind = "H^{s,2}-multiplier";
  r.value = std::sqrt(acc);
  r.s = s;
  r.p = 2;
  r.grid = g;
  return r;
}

NormReport lp_norm_domain(const SampledField& f, const SpecialLipschitzDomain& omega, double s,
                          double p, const ConeDyadicPair& pair, DomainVariant variant) {
  if (!(p > 1.0) && variant != DomainVariant::B_inf_inf)
    throw std::invalid_argument("lp_norm_domain: need 1 < p < inf");
  if (pair.prm.slope * omega.lip_bound >= 1.0)
    throw std::invalid_argument("lp_norm_domain: pair cone aperture vs domain Lipschitz bound");
  const GridSpec& g = f.grid;
  int N = g.N;
  int64_t nn = g.size();
  // inside-omega flags for the original grid points
  std::vector<char> in(nn, 0);
  {
    std::vector<int64_t> idx;
    std::vector<double> xp(N - 1);
    for (int64_t i = 0; i < nn; ++i) {
      g.unflatten(i, idx);
      for (int a = 0; a < N - 1; ++a) xp[a] = g.origin[a] + g.h[a] * double(idx[a]);
      in[i] = (g.origin[N - 1] + g.h[N - 1] * double(idx[N - 1]) > omega.rho(xp)) ? 1 : 0;
    }
  }
  std::vector<double> acc(nn, 0.0);  // square sum or running sup
  bool use_sup = variant != DomainVariant::F_p2;
  int J = pair.prm.J_max;
  std::vector<int64_t> idx, off(N);
  for (int j = 0; j <= J; ++j) {
    SampledField k = kernel_on_lattice(level_kernel_phi(pair, j), g.h);
    SampledField c = convolve(k, f);
    double w = std::pow(2.0, double(j) * s);
    // translate conv output back onto the original grid
    for (int a = 0; a < N; ++a)
      off[a] = (int64_t)std::llround((g.origin[a] - c.grid.origin[a]) / g.h[a]);
    for (int64_t i = 0; i < nn; ++i) {
      if (!in[i]) continue;
      g.unflatten(i, idx);
      bool ok = true;
      int64_t fi = 0;
      for (int a = 0; a < N && ok; ++a) {
        int64_t q = idx[a] + off[a];
        if (q < 0 || q >= c.grid.shape[a]) ok = false;
        else fi = fi * c.grid.shape[a] + q;
      }
      double v = ok ? w * std::abs(c.v[fi]) : 0.0;
      if (use_sup) acc[i] = std::max(acc[i], v);
      else acc[i] += v * v;
    }
  }
  NormReport r;
  r.s = s;
  r.p = p;
  r.J = J;
  r.grid = g;
  if (variant == DomainVariant::B_inf_inf) {
    r.kind = "B^s_{inf,inf}";
    r.p = 0;
    double m = 0;
    for (int64_t i = 0; i < nn; ++i) m = std::max(m, acc[i]);
    r.value = m;
    return r;
  }
  double cv = g.cell_volume(), sum = 0;
  for (int64_t i = 0; i < nn; ++i) {
    if (!in[i]) continue;
    double base = use_sup ? acc[i] : std::sqrt(acc[i]);
    sum += std::pow(base, p) * cv;
  }
  r.kind = use_sup ? "F^s_{p,inf}" : "H^{s,p}-domain";
  r.value = std::pow(sum, 1.0 / p);
  return r;
}

// integral of delta^w 1_ball over the cell at xc (half-widths hw), refining
// cells that straddle the boundary or sit in the weight's blow-up zone
static double cell_weight(const std::vector<double>& xc, const std::vector<double>& hw, double w,
                          int depth) {
  int N = (int)xc.size();
  double r = 0, diag2 = 0;
  for (int a = 0; a < N; ++a) {
    r += xc[a] * xc[a];
    diag2 += hw[a] * hw[a];
  }
  r = std::sqrt(r);
  double diag = std::sqrt(diag2);
  if (r - diag >= 1.0) return 0.0;  // entirely outside
  double vol = 1;
  for (int a = 0; a < N; ++a) vol *= 2.0 * hw[a];
  bool straddle = r + diag > 1.0;
  double dmin = std::max(1.0 - r - diag, 0.0);
  bool steep = w != 0.0 && dmin < 4.0 * diag;
  if (depth == 0 || (!straddle && !steep)) {
    if (straddle && r > 1.0) return 0.0;  // midpoint rule at the deepest level
    if (r >= 1.0) return 0.0;
    double d = 1.0 - r;
    return vol * (w == 0.0 ? 1.0 : std::pow(d, w));
  }
  std::vector<double> chw(N), cxc(N);
  for (int a = 0; a < N; ++a) chw[a] = 0.5 * hw[a];
  double sum = 0;
  for (int corner = 0; corner < (1 << N); ++corner) {
    for (int a = 0; a < N; ++a)
      cxc[a] = xc[a] + (((corner >> a) & 1) ? chw[a] : -chw[a]);
    sum += cell_weight(cxc, chw, w, depth - 1);
  }
  return sum;
}

NormReport weighted_lp_ball(const SampledField& f, const BallDomain& dom, double s_exp, double p) {
  if (!(p > 0)) throw std::invalid_argument("weighted_lp_ball: need p > 0");
  const GridSpec& g = f.grid;
  double w = s_exp * p;
  if (w <= -1.0) {
    // non-integrable weight unless f vanishes at the boundary
    std::vector<int64_t> idx;
    std::vector<double> x;
    for (int64_t i = 0; i < (int64_t)f.v.size(); ++i) {
      g.unflatten(i, idx);
      g.point(idx, x);
      if (std::abs(delta(dom, x)) < 0.05 && std::abs(f.v[i]) > 1e-12)
        throw std::runtime_error("divergence warning: delta^{s p} not integrable near the boundary");
    }
  }
  std::vector<double> hw(g.N);
  for (int a = 0; a < g.N; ++a) hw[a] = 0.5 * g.h[a];
  double acc = 0;
  std::vector<int64_t> idx;
  std::vector<double> x;
  for (int64_t i = 0; i < (int64_t)f.v.size(); ++i) {
    double av = std::abs(f.v[i]);
    if (av == 0) continue;
    g.unflatten(i, idx);
    g.point(idx, x);
    double cw = cell_weight(x, hw, w, 4);
    if (cw > 0) acc += std::pow(av, p) * cw;
  }
  NormReport r;
  r.kind = "weighted-L^p";
  r.value = std::pow(acc, 1.0 / p);
  r.s = s_exp;
  r.p = p;
  r.grid = g;
  return r;
}

double hs_equiv_ratio(const SampledField& f, double s, double p, const FourierLPFamily& fam) {
  double top = lp_norm_RN(f, s, p, fam).value;
  double bot = lp_norm_RN(f, s - 1.0, p, fam).value;
  for (int a = 0; a < f.grid.N; ++a) bot += lp_norm_RN(derivative(f, a), s - 1.0, p, fam).value;
  if (bot == 0) throw std::runtime_error("hs_equiv_ratio: zero denominator");
  return top / bot;
}

}  // namespace dbar
