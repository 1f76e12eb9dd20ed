#pragma once
// Uniform grids over boxes in R^N, sampled complex fields, and (0,q)-form
// coefficient bundles.
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbar {

using cd = std::complex<double>;

struct GridSpec {
  int N = 0;
  std::vector<double> origin;  // length N
  std::vector<double> h;       // spacing per axis
  std::vector<int64_t> shape;  // samples per axis

  GridSpec() = default;
  GridSpec(std::vector<double> org, std::vector<double> sp, std::vector<int64_t> sh)
      : N((int)sh.size()), origin(std::move(org)), h(std::move(sp)), shape(std::move(sh)) {
    validate();
  }
  // Isotropic convenience constructor.
  static GridSpec box(const std::vector<double>& lo, const std::vector<double>& hi, double spacing);

  void validate() const;
  int64_t size() const {
    int64_t s = 1;
    for (auto n : shape) s *= n;
    return s;
  }
  double cell_volume() const {
    double v = 1;
    for (double x : h) v *= x;
    return v;
  }
  double extent(int axis) const { return origin[axis] + h[axis] * double(shape[axis] - 1); }
  // Row-major flat index.
  int64_t flat(const std::vector<int64_t>& idx) const {
    int64_t f = 0;
    for (int a = 0; a < N; ++a) f = f * shape[a] + idx[a];
    return f;
  }
  void unflatten(int64_t f, std::vector<int64_t>& idx) const {
    idx.resize(N);
    for (int a = N - 1; a >= 0; --a) {
      idx[a] = f % shape[a];
      f /= shape[a];
    }
  }
  void point(const std::vector<int64_t>& idx, std::vector<double>& x) const {
    x.resize(N);
    for (int a = 0; a < N; ++a) x[a] = origin[a] + h[a] * double(idx[a]);
  }
  std::vector<double> point(const std::vector<int64_t>& idx) const {
    std::vector<double> x;
    point(idx, x);
    return x;
  }
  bool compatible_spacing(const GridSpec& o, double tol = 1e-12) const;
};

struct SampledField {
  GridSpec grid;
  std::vector<cd> v;

  SampledField() = default;
  explicit SampledField(GridSpec g) : grid(std::move(g)), v(grid.size(), cd(0)) {}
  static SampledField sample(const GridSpec& g, const std::function<cd(const std::vector<double>&)>& f);

  cd& at(const std::vector<int64_t>& idx) { return v[grid.flat(idx)]; }
  const cd& at(const std::vector<int64_t>& idx) const { return v[grid.flat(idx)]; }
  double max_abs() const;
  double l2() const;  // sqrt(sum |v|^2 * cell_volume)
};

// Real-valued field used internally for kernels, masks and weights.
struct RealField {
  GridSpec grid;
  std::vector<double> v;
  RealField() = default;
  explicit RealField(GridSpec g) : grid(std::move(g)), v(grid.size(), 0.0) {}
};

// Iterate all multi-indices of a grid; calls fn(flat, idx).
void for_each_index(const GridSpec& g, const std::function<void(int64_t, const std::vector<int64_t>&)>& fn);

// Strictly increasing q-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> increasing_multi_indices(int n, int q);

// (0,q)-form coefficient bundle on a grid over R^{2n}.
// Real coordinates: axis 2a = Re z_a, axis 2a+1 = Im z_a.
struct FormField {
  int n = 0, q = 0;
  GridSpec grid;
  std::vector<std::vector<int>> idx;  // C(n,q) sorted index tuples
  std::vector<std::vector<cd>> comp;  // parallel to idx

  FormField() = default;
  FormField(int n_, int q_, GridSpec g);
  int find(const std::vector<int>& I) const;  // -1 if absent
  double max_abs() const;
  double l2() const;
};

}  // namespace dbar
