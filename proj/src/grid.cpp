#include "dbar/grid.hpp"

#include <cmath>

namespace dbar {

GridSpec GridSpec::box(const std::vector<double>& lo, const std::vector<double>& hi, double spacing) {
  int N = (int)lo.size();
  std::vector<double> org(N), sp(N, spacing);
  std::vector<int64_t> sh(N);
  for (int a = 0; a < N; ++a) {
    org[a] = lo[a];
    sh[a] = (int64_t)std::floor((hi[a] - lo[a]) / spacing + 1e-9) + 1;
    if (sh[a] < 4) sh[a] = 4;
  }
  return GridSpec(org, sp, sh);
}

void GridSpec::validate() const {
  if ((int)origin.size() != N || (int)h.size() != N || (int)shape.size() != N)
    throw std::invalid_argument("grid: inconsistent dimensions");
  for (int a = 0; a < N; ++a) {
    if (!(h[a] > 0)) throw std::invalid_argument("grid: h must be positive");
    if (shape[a] < 4) throw std::invalid_argument("grid: shape >= 4 per axis required");
  }
}

bool GridSpec::compatible_spacing(const GridSpec& o, double tol) const {
  if (N != o.N) return false;
  for (int a = 0; a < N; ++a)
    if (std::abs(h[a] - o.h[a]) > tol * h[a]) return false;
  return true;
}

void for_each_index(const GridSpec& g, const std::function<void(int64_t, const std::vector<int64_t>&)>& fn) {
  std::vector<int64_t> idx(g.N, 0);
  int64_t n = g.size();
  for (int64_t f = 0; f < n; ++f) {
    fn(f, idx);
    for (int a = g.N - 1; a >= 0; --a) {
      if (++idx[a] < g.shape[a]) break;
      idx[a] = 0;
    }
  }
}

SampledField SampledField::sample(const GridSpec& g, const std::function<cd(const std::vector<double>&)>& f) {
  SampledField out(g);
  std::vector<double> x(g.N);
  for_each_index(g, [&](int64_t fl, const std::vector<int64_t>& idx) {
    g.point(idx, x);
    out.v[fl] = f(x);
  });
  return out;
}

double SampledField::max_abs() const {
  double m = 0;
  for (const cd& z : v) m = std::max(m, std::abs(z));
  return m;
}

double SampledField::l2() const {
  double s = 0;
  for (const cd& z : v) s += std::norm(z);
  return std::sqrt(s * grid.cell_volume());
}

std::vector<std::vector<int>> increasing_multi_indices(int n, int q) {
  std::vector<std::vector<int>> out;
  if (q == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> cur(q);
  for (int i = 0; i < q; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = q - 1;
    while (i >= 0 && cur[i] == n - q + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < q; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

FormField::FormField(int n_, int q_, GridSpec g) : n(n_), q(q_), grid(std::move(g)) {
  if (q < 0 || q > n) throw std::invalid_argument("form degree out of range");
  if (grid.N != 2 * n) throw std::invalid_argument("form grid must live over R^{2n}");
  idx = increasing_multi_indices(n, q);
  comp.assign(idx.size(), std::vector<cd>(grid.size(), cd(0)));
}

int FormField::find(const std::vector<int>& I) const {
  for (size_t k = 0; k < idx.size(); ++k)
    if (idx[k] == I) return (int)k;
  return -1;
}

double FormField::max_abs() const {
  double m = 0;
  for (const auto& c : comp)
    for (const cd& z : c) m = std::max(m, std::abs(z));
  return m;
}

double FormField::l2() const {
  double s = 0;
  for (const auto& c : comp)
    for (const cd& z : c) s += std::norm(z);
  return std::sqrt(s * grid.cell_volume());
}

}  // namespace dbar
