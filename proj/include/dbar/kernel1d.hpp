#pragma once
// The 1-D moment-free kernel g supported on [1, oo): branch-difference
// evaluation, adaptive quadrature of its mass, and contour certificates for
// the vanishing of all polynomial moments.
#include <complex>

namespace dbar {

// g(t) = -Im G(t-i0) / (2 pi G(0) t), G(z) = exp(-(z-1)^{1/8}-(z-1)^{-1/8})
// with branch 0 < arg(z-1) < 2 pi. Exactly 0 for t <= 1 (clamped just above).
double eval_g(double t);

// Adaptive quadrature of g over [1, T] (substitution s = (t-1)^{1/8}).
double g_integral(double T, double tol = 1e-9);

// Moment int t^k g(t) dt by rotating the s-contour to arg s = -pi/4, where
// the integrand is exactly real: the only imaginary contribution is the
// residue at s = exp(-i pi/8), present for k = 0 alone. Returns 1 for k = 0
// and 0 for k >= 1.
double g_moment(int k);

// Numeric witness for g_moment: max over quadrature nodes of the relative
// imaginary part of the rotated-contour integrand, evaluated with complex
// arithmetic (no hand simplification). Should sit at roundoff level.
double g_moment_phase_residual(int k);

// Direct long-double quadrature of int t g(t) dt on the real axis; feasible
// only for k = 1 (larger k loses the cancellation to roundoff).
double g_moment1_direct(double T = 1e12);

// Smooth compactly supported seed profile on (1, L): exp(-1/(t-1) - 1/(L-t)).
double g_bump(double t, double L);

}  // namespace dbar
