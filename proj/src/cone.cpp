#include "dbar/cone.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "dbar/fd.hpp"
#include "dbar/fft.hpp"
#include "dbar/kernel1d.hpp"

namespace dbar {

std::vector<std::vector<double>> theta_map(int N, double d0, double slope) {
  // Householder H swapping e_N and the orthant axis (1,..,1)/sqrt(N)
  std::vector<double> u(N);
  double rn = 1.0 / std::sqrt((double)N);
  for (int i = 0; i < N; ++i) u[i] = rn - (i == N - 1 ? 1.0 : 0.0);
  double uu = 0;
  for (double x : u) uu += x * x;
  std::vector<std::vector<double>> H(N, std::vector<double>(N, 0.0));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) H[i][j] = (i == j ? 1.0 : 0.0) - (uu > 0 ? 2.0 * u[i] * u[j] / uu : 0.0);
  double sp = d0 / std::sqrt((double)N);
  double mu = slope * sp / std::sqrt((double)(N - 1));
  // x = Theta^{-1} y = -diag(mu,..,mu,sp) H y, so Theta = -H diag(1/mu,..,1/sp)
  std::vector<std::vector<double>> T(N, std::vector<double>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) T[i][j] = -H[i][j] / (j == N - 1 ? sp : mu);
  return T;
}

std::vector<double> apply_matrix(const std::vector<std::vector<double>>& m, const std::vector<double>& x) {
  int N = (int)m.size();
  std::vector<double> y(N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) y[i] += m[i][j] * x[j];
  return y;
}

static std::vector<std::vector<double>> invert_matrix(std::vector<std::vector<double>> a) {
  int N = (int)a.size();
  std::vector<std::vector<double>> inv(N, std::vector<double>(N, 0.0));
  for (int i = 0; i < N; ++i) inv[i][i] = 1.0;
  for (int c = 0; c < N; ++c) {
    int p = c;
    for (int r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-14) throw std::runtime_error("geometry error: theta not invertible");
    std::swap(a[c], a[p]);
    std::swap(inv[c], inv[p]);
    double d = a[c][c];
    for (int j = 0; j < N; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (int r = 0; r < N; ++r) {
      if (r == c) continue;
      double f = a[r][c];
      for (int j = 0; j < N; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

double discrete_moment(const SampledField& f, const std::vector<int>& alpha) {
  double vol = f.grid.cell_volume();
  double out = 0;
  std::vector<double> x(f.grid.N);
  for_each_index(f.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
    if (f.v[fl] == cd(0)) return;
    f.grid.point(idx, x);
    double m = 1;
    for (int a = 0; a < f.grid.N; ++a)
      for (int r = 0; r < alpha[a]; ++r) m *= x[a];
    out += f.v[fl].real() * m;
  });
  return out * vol;
}

double mass_above(const SampledField& f, double c) {
  double vol = f.grid.cell_volume();
  double out = 0;
  int ax = f.grid.N - 1;
  std::vector<double> x(f.grid.N);
  for_each_index(f.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
    if (f.v[fl] == cd(0)) return;
    double xN = f.grid.origin[ax] + f.grid.h[ax] * double(idx[ax]);
    if (xN > c) out += std::abs(f.v[fl]);
    (void)x;
  });
  return out * vol;
}

cd dtft(const SampledField& f, const std::vector<double>& xi) {
  double vol = f.grid.cell_volume();
  cd out(0);
  std::vector<double> x(f.grid.N);
  for_each_index(f.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
    if (f.v[fl] == cd(0)) return;
    f.grid.point(idx, x);
    double ph = 0;
    for (int a = 0; a < f.grid.N; ++a) ph += xi[a] * x[a];
    out += f.v[fl] * std::polar(1.0, -ph);
  });
  return out * vol;
}

static void check_cone(const ConeParams& prm, const std::vector<std::vector<double>>& theta_inv) {
  int N = prm.N;
  double tol = 1e-9;
  // rays of the orthant
  for (int i = 0; i < N; ++i) {
    std::vector<double> e(N, 0.0);
    e[i] = 1.0;
    auto d = apply_matrix(theta_inv, e);
    double tr = 0;
    for (int a = 0; a < N - 1; ++a) tr += d[a] * d[a];
    tr = std::sqrt(tr);
    if (!(d[N - 1] < 0) || tr > prm.slope * (-d[N - 1]) * (1 + tol))
      throw std::runtime_error("geometry error: orthant ray e_" + std::to_string(i) +
                               " maps outside the cone");
  }
  // vertices of [1,L]^N
  for (int mask = 0; mask < (1 << N); ++mask) {
    std::vector<double> y(N);
    for (int i = 0; i < N; ++i) y[i] = (mask >> i) & 1 ? prm.L : 1.0;
    auto x = apply_matrix(theta_inv, y);
    double tr = 0;
    for (int a = 0; a < N - 1; ++a) tr += x[a] * x[a];
    tr = std::sqrt(tr);
    if (!(x[N - 1] <= -prm.d0 * (1 - tol)) || tr > prm.slope * (-x[N - 1]) * (1 + tol))
      throw std::runtime_error("geometry error: support vertex maps outside the cone");
  }
}

SampledField build_phi0(const ConeParams& prm, const std::vector<std::vector<double>>& theta) {
  int N = prm.N;
  auto theta_inv = invert_matrix(theta);
  check_cone(prm, theta_inv);

  // bounding box of Theta^{-1}([1,L]^N)
  std::vector<double> lo(N, 1e300), hi(N, -1e300);
  for (int mask = 0; mask < (1 << N); ++mask) {
    std::vector<double> y(N);
    for (int i = 0; i < N; ++i) y[i] = (mask >> i) & 1 ? prm.L : 1.0;
    auto x = apply_matrix(theta_inv, y);
    for (int a = 0; a < N; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  std::vector<int64_t> klo(N), khi(N), shape(N);
  std::vector<double> origin(N);
  for (int a = 0; a < N; ++a) {
    klo[a] = (int64_t)std::ceil(lo[a] / prm.h[a] - 1e-9);
    khi[a] = (int64_t)std::floor(hi[a] / prm.h[a] + 1e-9);
    // pad to the minimum shape away from the one-sided support boundary
    while (khi[a] - klo[a] + 1 < 4) {
      if (a == N - 1) --klo[a];
      else ++khi[a];
    }
    origin[a] = prm.h[a] * double(klo[a]);
    shape[a] = khi[a] - klo[a] + 1;
  }
  SampledField out(GridSpec(origin, prm.h, shape));

  // seed values and support list
  std::vector<int64_t> support;
  std::vector<double> seed;
  std::vector<std::vector<double>> pts;
  std::vector<double> x(N);
  for_each_index(out.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
    out.grid.point(idx, x);
    auto y = apply_matrix(theta, x);
    double s = 1;
    for (int i = 0; i < N; ++i) s *= g_bump(y[i], prm.L);
    if (s > 0) {
      support.push_back(fl);
      seed.push_back(s);
      pts.push_back(x);
    }
  });
  int64_t n = (int64_t)support.size();
  // moment constraints |beta| <= K_tot
  std::vector<std::vector<int>> betas;
  for (int k = 0; k <= prm.K_tot; ++k)
    for (auto& b : derivative_multi_indices(N, k)) betas.push_back(b);
  int64_t m = (int64_t)betas.size();
  if (n == 0) throw std::runtime_error("resolution error: empty seed support");

  // scaled coordinates for conditioning
  std::vector<double> c(N, 0.0), R(N, 0.0);
  for (auto& p : pts)
    for (int a = 0; a < N; ++a) c[a] += p[a];
  for (int a = 0; a < N; ++a) c[a] /= double(n);
  for (auto& p : pts)
    for (int a = 0; a < N; ++a) R[a] = std::max(R[a], std::abs(p[a] - c[a]));
  for (int a = 0; a < N; ++a) R[a] = std::max(R[a], prm.h[a]);

  using LD = long double;
  using MatX = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>;
  using VecX = Eigen::Matrix<LD, Eigen::Dynamic, 1>;
  LD vol = 1;
  for (int a = 0; a < N; ++a) vol *= (LD)prm.h[a];
  MatX M(m, n);
  for (int64_t r = 0; r < m; ++r)
    for (int64_t p = 0; p < n; ++p) {
      LD v = vol;
      for (int a = 0; a < N; ++a) {
        LD t = ((LD)pts[p][a] - (LD)c[a]) / (LD)R[a];
        for (int rep = 0; rep < betas[r][a]; ++rep) v *= t;
      }
      M(r, p) = v;
    }
  // targets: measure of mass one with all other raw moments zero has scaled
  // moments prod (-c_a/R_a)^{beta_a}
  VecX b(m);
  for (int64_t r = 0; r < m; ++r) {
    LD v = 1;
    for (int a = 0; a < N; ++a)
      for (int rep = 0; rep < betas[r][a]; ++rep) v *= (LD)(-c[a]) / (LD)R[a];
    b(r) = v;
  }
  VecX s(n);
  LD tot = 0;
  for (int64_t p = 0; p < n; ++p) tot += (LD)seed[p];
  tot *= vol;
  for (int64_t p = 0; p < n; ++p) s(p) = (LD)seed[p] / tot;

  // least-norm correction: w = s + M^T (M M^T)^{-1} (b - M s). The weights are
  // necessarily large for high K_tot: the kernel matches the moments of a point
  // mass at the origin, far outside its own support.
  // rank-deficient systems are fine (e.g. all points on the depth axis make
  // transverse moment rows vanish identically); the residual check below
  // rejects genuinely infeasible ones
  VecX rhs = b - M * s;
  MatX G = M * M.transpose();
  VecX lam = G.completeOrthogonalDecomposition().solve(rhs);
  VecX w = s + M.transpose() * lam;
  LD resid = (M * w - b).cwiseAbs().maxCoeff();
  if ((double)resid > 1e-11)
    throw std::runtime_error("resolution error: moment system residual " + std::to_string((double)resid));

  for (int64_t p = 0; p < n; ++p) out.v[support[p]] = cd((double)w(p));
  return out;
}

SampledField combine(const SampledField& fa, double a, const SampledField& fb, double b) {
  const GridSpec& ga = fa.grid;
  const GridSpec& gb = fb.grid;
  if (!ga.compatible_spacing(gb, 1e-9)) throw std::invalid_argument("combine: incompatible spacing");
  int N = ga.N;
  std::vector<double> origin(N);
  std::vector<int64_t> shape(N);
  for (int ax = 0; ax < N; ++ax) {
    double lo = std::min(ga.origin[ax], gb.origin[ax]);
    double hi = std::max(ga.extent(ax), gb.extent(ax));
    origin[ax] = lo;
    shape[ax] = (int64_t)std::llround((hi - lo) / ga.h[ax]) + 1;
    if (shape[ax] < 4) shape[ax] = 4;
  }
  SampledField out(GridSpec(origin, ga.h, shape));
  auto add = [&](const SampledField& f, double coef) {
    std::vector<int64_t> off(N), oidx(N);
    for (int ax = 0; ax < N; ++ax) {
      double d = (f.grid.origin[ax] - origin[ax]) / ga.h[ax];
      off[ax] = (int64_t)std::llround(d);
      if (std::abs(d - double(off[ax])) > 1e-6) throw std::invalid_argument("combine: lattices misaligned");
    }
    for_each_index(f.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
      if (f.v[fl] == cd(0)) return;
      for (int ax = 0; ax < N; ++ax) oidx[ax] = idx[ax] + off[ax];
      out.v[out.grid.flat(oidx)] += coef * f.v[fl];
    });
  };
  add(fa, a);
  add(fb, b);
  return out;
}

SampledField refine_lattice(const SampledField& f, int factor) {
  int N = f.grid.N;
  std::vector<double> h(N), origin = f.grid.origin;
  std::vector<int64_t> shape(N);
  for (int a = 0; a < N; ++a) {
    h[a] = f.grid.h[a] / double(factor);
    shape[a] = (f.grid.shape[a] - 1) * factor + 1;
    if (shape[a] < 4) shape[a] = 4;
  }
  SampledField out(GridSpec(origin, h, shape));
  double scale = std::pow((double)factor, N);
  std::vector<int64_t> oidx(N);
  for_each_index(f.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
    if (f.v[fl] == cd(0)) return;
    for (int a = 0; a < N; ++a) oidx[a] = idx[a] * factor;
    out.v[out.grid.flat(oidx)] = f.v[fl] * scale;
  });
  return out;
}

SampledField dilate_measure(const SampledField& f, int j) {
  int N = f.grid.N;
  double sc = std::pow(2.0, j);
  std::vector<double> h(N), origin(N);
  for (int a = 0; a < N; ++a) {
    h[a] = f.grid.h[a] / sc;
    origin[a] = f.grid.origin[a] / sc;
  }
  SampledField out(GridSpec(origin, h, f.grid.shape));
  double scale = std::pow(2.0, N * j);
  for (size_t i = 0; i < f.v.size(); ++i) out.v[i] = f.v[i] * scale;
  return out;
}

// drop FFT noise so support certificates see true zeros
static void clean(SampledField& f, double rel = 1e-12) {
  double m = f.max_abs() * rel;
  for (auto& z : f.v)
    if (std::abs(z) < m) z = cd(0);
}

ConeDyadicPair build_pair(const ConeParams& prm) {
  ConeDyadicPair pair;
  pair.prm = prm;
  pair.theta = theta_map(prm.N, prm.d0, prm.slope);
  pair.phi0 = build_phi0(prm, pair.theta);

  SampledField A1 = dilate_measure(pair.phi0, 1);
  SampledField A0r = refine_lattice(pair.phi0, 2);
  pair.phi1 = combine(A1, 1.0, A0r, -1.0);

  SampledField T2 = convolve(pair.phi0, pair.phi0);
  SampledField T3 = convolve(T2, pair.phi0);
  clean(T3);
  pair.psi0 = combine(pair.phi0, 2.0, T3, -1.0);

  SampledField B = combine(A1, 1.0, A0r, 1.0);
  SampledField C = combine(convolve(A1, A1), 1.0, convolve(A0r, A0r), 1.0);
  SampledField BC = convolve(B, C);
  clean(BC);
  pair.psi1 = combine(B, 2.0, BC, -1.0);
  return pair;
}

void ConeDyadicPair::ensure_cache() const {
  if (!pts_.empty()) return;
  std::vector<double> x(phi0.grid.N);
  for_each_index(phi0.grid, [&](int64_t fl, const std::vector<int64_t>& idx) {
    if (phi0.v[fl] == cd(0)) return;
    phi0.grid.point(idx, x);
    pts_.push_back(x);
    wts_.push_back(phi0.v[fl].real() * phi0.grid.cell_volume());
  });
}

cd ConeDyadicPair::symbol_A(const std::vector<double>& xi) const {
  ensure_cache();
  cd out(0);
  for (size_t p = 0; p < pts_.size(); ++p) {
    double ph = 0;
    for (size_t a = 0; a < xi.size(); ++a) ph += xi[a] * pts_[p][a];
    out += wts_[p] * std::polar(1.0, -ph);
  }
  return out;
}

static std::vector<double> scale_vec(const std::vector<double>& xi, double s) {
  std::vector<double> o(xi);
  for (auto& v : o) v *= s;
  return o;
}

cd ConeDyadicPair::symbol_phi(int j, const std::vector<double>& xi) const {
  cd mj = symbol_A(scale_vec(xi, std::pow(2.0, -j)));
  if (j == 0) return mj;
  return mj - symbol_A(scale_vec(xi, std::pow(2.0, -j + 1)));
}

cd ConeDyadicPair::symbol_psi(int j, const std::vector<double>& xi) const {
  cd mj = symbol_A(scale_vec(xi, std::pow(2.0, -j)));
  if (j == 0) return mj * (2.0 - mj * mj);
  cd mp = symbol_A(scale_vec(xi, std::pow(2.0, -j + 1)));
  return (mj + mp) * (2.0 - mj * mj - mp * mp);
}

cd ConeDyadicPair::partial_sum(int J, const std::vector<double>& xi) const {
  cd s(0);
  for (int j = 0; j <= J; ++j) s += symbol_phi(j, xi) * symbol_psi(j, xi);
  return s;
}

double reconstruction_error(const ConeDyadicPair& pair, int J,
                            const std::vector<std::vector<double>>& freqs,
                            const std::vector<cd>& coeffs, int x_samples, unsigned seed) {
  int N = pair.prm.N;
  std::vector<cd> defect(freqs.size());
  for (size_t m = 0; m < freqs.size(); ++m) defect[m] = pair.partial_sum(J, freqs[m]) - 1.0;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  double worst = 0;
  std::vector<double> x(N);
  for (int s = 0; s < x_samples; ++s) {
    for (int a = 0; a < N; ++a) x[a] = u(rng);
    cd e(0);
    for (size_t m = 0; m < freqs.size(); ++m) {
      double ph = 0;
      for (int a = 0; a < N; ++a) ph += freqs[m][a] * x[a];
      e += coeffs[m] * defect[m] * std::polar(1.0, ph);
    }
    worst = std::max(worst, std::abs(e));
  }
  return worst;
}

}  // namespace dbar
