#include "dbar/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace dbar {

static std::mutex plan_mutex;  // FFTW planning is not thread-safe

static std::vector<int> to_int_dims(const std::vector<int64_t>& shape) {
  std::vector<int> dims(shape.size());
  int64_t n = 1;
  for (size_t i = 0; i < shape.size(); ++i) {
    dims[i] = (int)shape[i];
    n *= shape[i];
  }
  if (n <= 0) throw std::invalid_argument("fft: empty shape");
  return dims;
}

void fft(std::vector<cd>& a, const std::vector<int64_t>& shape, int sign) {
  auto dims = to_int_dims(shape);
  int64_t n = 1;
  for (auto d : dims) n *= d;
  if ((int64_t)a.size() != n) throw std::invalid_argument("fft: size/shape mismatch");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft((int)dims.size(), dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                         reinterpret_cast<fftw_complex*>(a.data()),
                         sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
}

std::vector<int64_t> spectrum_shape(const std::vector<int64_t>& shape) {
  std::vector<int64_t> s = shape;
  s.back() = s.back() / 2 + 1;
  return s;
}

void fft_r2c(std::vector<double>& in, std::vector<cd>& out, const std::vector<int64_t>& shape) {
  auto dims = to_int_dims(shape);
  auto ss = spectrum_shape(shape);
  int64_t ns = 1;
  for (auto d : ss) ns *= d;
  out.resize(ns);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft_r2c((int)dims.size(), dims.data(), in.data(),
                             reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
}

void fft_c2r(std::vector<cd>& in, std::vector<double>& out, const std::vector<int64_t>& shape) {
  auto dims = to_int_dims(shape);
  int64_t n = 1;
  for (auto d : dims) n *= d;
  out.resize(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft_c2r((int)dims.size(), dims.data(),
                             reinterpret_cast<fftw_complex*>(in.data()), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
}

SampledField convolve(const SampledField& kernel, const SampledField& f) {
  const GridSpec& kg = kernel.grid;
  const GridSpec& fg = f.grid;
  if (!kg.compatible_spacing(fg, 1e-9)) throw std::invalid_argument("convolve: incompatible spacing");
  int N = kg.N;
  std::vector<int64_t> oshape(N);
  std::vector<double> oorigin(N);
  for (int a = 0; a < N; ++a) {
    oshape[a] = kg.shape[a] + fg.shape[a] - 1;
    oorigin[a] = kg.origin[a] + fg.origin[a];
  }
  GridSpec og(oorigin, kg.h, oshape);
  int64_t n = og.size();

  // sparse kernels (e.g. cone measures on the depth axis) are much cheaper by
  // direct accumulation than by padded FFTs
  int64_t nz = 0;
  for (auto& v : kernel.v)
    if (v != cd(0)) ++nz;
  if (nz > 0 && nz <= 256) {
    struct KPoint {
      std::vector<int64_t> id;
      cd w;
    };
    std::vector<KPoint> kps;
    std::vector<int64_t> idv(N);
    double vol = kg.cell_volume();
    for (int64_t i = 0; i < (int64_t)kernel.v.size(); ++i)
      if (kernel.v[i] != cd(0)) {
        kg.unflatten(i, idv);
        kps.push_back({idv, kernel.v[i] * vol});
      }
    std::vector<int64_t> fstr(N, 1);
    for (int a = N - 2; a >= 0; --a) fstr[a] = fstr[a + 1] * fg.shape[a + 1];
    int64_t orowlen = oshape[N - 1], frowlen = fg.shape[N - 1];
    int64_t norows = n / orowlen;
    SampledField out(og);
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < norows; ++r) {
      std::vector<int64_t> oid(N, 0);
      int64_t t = r;
      for (int a = N - 2; a >= 0; --a) {
        oid[a] = t % oshape[a];
        t /= oshape[a];
      }
      cd* orow = &out.v[r * orowlen];
      for (const auto& kp : kps) {
        int64_t fbase = 0;
        bool ok = true;
        for (int a = 0; a < N - 1 && ok; ++a) {
          int64_t q = oid[a] - kp.id[a];
          if (q < 0 || q >= fg.shape[a]) ok = false;
          else fbase += q * fstr[a];
        }
        if (!ok) continue;
        int64_t klast = kp.id[N - 1];
        int64_t hi = std::min(klast + frowlen - 1, orowlen - 1);
        const cd* frow = &f.v[fbase];
        for (int64_t o3 = klast; o3 <= hi; ++o3) orow[o3] += kp.w * frow[o3 - klast];
      }
    }
    return out;
  }

  std::vector<cd> ka(n, cd(0)), fa(n, cd(0));
  std::vector<int64_t> idx(N);
  for (int64_t i = 0; i < (int64_t)kernel.v.size(); ++i) {
    kg.unflatten(i, idx);
    ka[og.flat(idx)] = kernel.v[i];
  }
  for (int64_t i = 0; i < (int64_t)f.v.size(); ++i) {
    fg.unflatten(i, idx);
    fa[og.flat(idx)] = f.v[i];
  }
  fft(ka, oshape, -1);
  fft(fa, oshape, -1);
  double scale = kg.cell_volume() / double(n);
  for (int64_t i = 0; i < n; ++i) ka[i] *= fa[i] * scale;
  fft(ka, oshape, +1);

  SampledField out(og);
  out.v = std::move(ka);
  return out;
}

double fft_roundtrip_error(const SampledField& f) {
  std::vector<cd> a = f.v;
  int64_t n = f.grid.size();
  fft(a, f.grid.shape, -1);
  double mass_freq = 0;
  for (const cd& z : a) mass_freq += std::norm(z);
  mass_freq /= double(n);
  fft(a, f.grid.shape, +1);
  double err = 0, mass = 0;
  for (int64_t i = 0; i < n; ++i) {
    err += std::norm(a[i] / double(n) - f.v[i]);
    mass += std::norm(f.v[i]);
  }
  if (mass == 0) return 0;
  double e1 = std::sqrt(err / mass);
  double e2 = std::abs(mass_freq - mass) / mass;
  return std::max(e1, e2);
}

}  // namespace dbar
