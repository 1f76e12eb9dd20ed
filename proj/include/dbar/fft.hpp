#pragma once
// FFT engine shared by all modules: n-dimensional transforms (FFTW) and the
// zero-padded linear convolution used for kernel application.
#include "dbar/grid.hpp"

namespace dbar {

// In-place c2c transform over the given row-major shape.
// sign = -1 forward, +1 backward. Backward is unnormalized (scale by 1/size).
void fft(std::vector<cd>& a, const std::vector<int64_t>& shape, int sign);

// Real-to-halfcomplex transform; out has shape[..., shape[N-1]/2+1].
void fft_r2c(std::vector<double>& in, std::vector<cd>& out, const std::vector<int64_t>& shape);
// Inverse of fft_r2c; unnormalized, destroys `in`.
void fft_c2r(std::vector<cd>& in, std::vector<double>& out, const std::vector<int64_t>& shape);

// Shape of the half-complex spectrum for a real array of the given shape.
std::vector<int64_t> spectrum_shape(const std::vector<int64_t>& shape);

// Linear convolution by zero-padded FFT. Output grid covers
// supp(kernel) + supp(f); values approximate (k * f)(x) = sum k(y) f(x-y) h^N.
SampledField convolve(const SampledField& kernel, const SampledField& f);

// Relative l2 deviation of a forward+backward round trip (Parseval check).
double fft_roundtrip_error(const SampledField& f);

}  // namespace dbar
