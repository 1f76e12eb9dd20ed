#include "dbar/fd.hpp"

namespace dbar {

SampledField derivative(const SampledField& f, int axis) {
  const GridSpec& g = f.grid;
  if (axis < 0 || axis >= g.N) throw std::invalid_argument("derivative: bad axis");
  if (g.shape[axis] < 3) throw std::invalid_argument("derivative: axis too short for stencil");
  SampledField out(g);
  // stride of one step along `axis`
  int64_t stride = 1;
  for (int a = g.N - 1; a > axis; --a) stride *= g.shape[a];
  int64_t len = g.shape[axis];
  double inv2h = 1.0 / (2.0 * g.h[axis]);
  int64_t outer = g.size() / (len * stride);
#pragma omp parallel for
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t s = 0; s < stride; ++s) {
      int64_t base = o * len * stride + s;
      const cd* in = f.v.data();
      cd* ov = out.v.data();
      // one-sided second order at faces
      ov[base] = (-3.0 * in[base] + 4.0 * in[base + stride] - in[base + 2 * stride]) * inv2h;
      int64_t last = base + (len - 1) * stride;
      ov[last] = (3.0 * in[last] - 4.0 * in[last - stride] + in[last - 2 * stride]) * inv2h;
      for (int64_t i = 1; i < len - 1; ++i) {
        int64_t p = base + i * stride;
        ov[p] = (in[p + stride] - in[p - stride]) * inv2h;
      }
    }
  }
  return out;
}

std::vector<std::vector<int>> derivative_multi_indices(int N, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(N, 0);
  // enumerate alpha with |alpha| = k, lexicographic descending on first axes
  std::function<void(int, int)> rec = [&](int axis, int rem) {
    if (axis == N - 1) {
      alpha[axis] = rem;
      out.push_back(alpha);
      return;
    }
    for (int v = rem; v >= 0; --v) {
      alpha[axis] = v;
      rec(axis + 1, rem - v);
    }
  };
  rec(0, k);
  return out;
}

std::vector<SampledField> gradient(const SampledField& f, int k) {
  if (k < 1) throw std::invalid_argument("gradient: k >= 1 required");
  auto alphas = derivative_multi_indices(f.grid.N, k);
  std::vector<SampledField> out;
  out.reserve(alphas.size());
  for (const auto& alpha : alphas) {
    SampledField d = f;
    for (int a = 0; a < f.grid.N; ++a)
      for (int r = 0; r < alpha[a]; ++r) d = derivative(d, a);
    out.push_back(std::move(d));
  }
  return out;
}

FormField dbar(const FormField& phi) {
  if (phi.q >= phi.n) throw std::invalid_argument("dbar: form already top antiholomorphic degree");
  FormField out(phi.n, phi.q + 1, phi.grid);
  // cache dzbar_a of every input component on demand
  std::vector<std::vector<SampledField>> dz(phi.comp.size());
  auto dzbar = [&](int ci, int a) -> const SampledField& {
    if (dz[ci].empty()) {
      dz[ci].reserve(phi.n);
      SampledField tmp(phi.grid);
      tmp.v = phi.comp[ci];
      for (int b = 0; b < phi.n; ++b) {
        SampledField dx = derivative(tmp, 2 * b);
        SampledField dy = derivative(tmp, 2 * b + 1);
        SampledField d(phi.grid);
        int64_t n = phi.grid.size();
        for (int64_t i = 0; i < n; ++i) d.v[i] = 0.5 * (dx.v[i] + cd(0, 1) * dy.v[i]);
        dz[ci].push_back(std::move(d));
      }
    }
    return dz[ci][a];
  };
  for (size_t oi = 0; oi < out.idx.size(); ++oi) {
    const std::vector<int>& J = out.idx[oi];
    int64_t n = phi.grid.size();
    for (int pos = 0; pos < (int)J.size(); ++pos) {
      std::vector<int> I;
      for (int t = 0; t < (int)J.size(); ++t)
        if (t != pos) I.push_back(J[t]);
      int ci = phi.find(I);
      if (ci < 0) continue;
      double sign = (pos % 2 == 0) ? 1.0 : -1.0;
      const SampledField& d = dzbar(ci, J[pos]);
      for (int64_t i = 0; i < n; ++i) out.comp[oi][i] += sign * d.v[i];
    }
  }
  return out;
}

}  // namespace dbar
