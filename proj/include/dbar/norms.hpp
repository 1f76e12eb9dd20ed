#pragma once
// Norm estimators: Littlewood-Paley H^{s,p} on R^N and on a special
// Lipschitz domain, the F^s_{p,inf} / B^s_{inf,inf} variants, and weighted
// L^p(Omega, delta^s) quadrature.
#include <string>

#include "dbar/cone.hpp"
#include "dbar/domain.hpp"
#include "dbar/grid.hpp"

namespace dbar {

// dyadic Fourier partition: phi0_hat radial, == 1 on {|xi| <= 1}, smooth
// polynomial step down to 0 at |xi| = 2; phi_j telescopes to phi0(2^-J xi)
struct FourierLPFamily {
  int J = 6;
  double phi0_hat(double r) const;        // radial profile
  double level_hat(int j, double r) const;  // phi_j profile, j = 0..J
};

struct NormReport {
  std::string kind;
  double value = 0;
  double s = 0, p = 2;
  int J = 0;
  GridSpec grid;
  std::string csv_row() const;  // kind,s,p,J,h,value
};

enum class DomainVariant { F_p2, F_p_inf, B_inf_inf };

// truncated Littlewood-Paley norm || (sum_j w_j^s |phi_j * f|^2)^{1/2} ||_Lp
// with square-normalized bands and inhomogeneous dyadic weights
NormReport lp_norm_RN(const SampledField& f, double s, double p, const FourierLPFamily& fam);

// Fourier-multiplier oracle || (1 + 4 pi^2 |xi|^2)^{s/2} f_hat ||_{L^2} (p = 2)
NormReport multiplier_hs_norm(const SampledField& f, double s);

// intrinsic domain norm with the cone-supported pair: translations read f
// only on omega by the one-sided support
NormReport lp_norm_domain(const SampledField& f, const SpecialLipschitzDomain& omega, double s,
                          double p, const ConeDyadicPair& pair, DomainVariant variant);

// (integral |f|^p delta^{s_exp p})^{1/p} over the ball by midpoint quadrature
// with recursive cell refinement near the boundary
NormReport weighted_lp_ball(const SampledField& f, const BallDomain& dom, double s_exp, double p);

// || f ||_{H^{s,p}} / (|| f ||_{H^{s-1,p}} + sum_a || d_a f ||_{H^{s-1,p}})
double hs_equiv_ratio(const SampledField& f, double s, double p, const FourierLPFamily& fam);

}  // namespace dbar
