#pragma once
// Geometry: special Lipschitz graph domains with dyadic strips, the unit ball
// in C^n with a cap atlas of graph charts, and boundary-adapted coordinates.
#include "dbar/grid.hpp"

namespace dbar {

struct SpecialLipschitzDomain {
  int N = 2;  // ambient dimension; graph over R^{N-1}, domain above the graph
  std::function<double(const std::vector<double>&)> rho;
  double lip_bound = 0;  // certified sup|rho| + sup|grad rho|

  double graph(const std::vector<double>& x) const {  // rho(x') for ambient x
    std::vector<double> xp(x.begin(), x.end() - 1);
    return rho(xp);
  }
  bool inside(const std::vector<double>& x) const { return x.back() > graph(x); }
};

SpecialLipschitzDomain flat_domain(int N);
// rho(x') = a sin(x'_1)
SpecialLipschitzDomain sine_domain(int N, double a);

// equivalent distance |x_N - rho(x')| (within factor 2 of the true distance)
double delta(const SpecialLipschitzDomain& dom, const std::vector<double>& x);

// sampled certificate: sup|rho| + max difference quotient over a box
double sampled_lip(const SpecialLipschitzDomain& dom, double box, int samples, unsigned seed);

struct StripIndex {
  int k = 0;
  bool is_inside = false;  // P_k if true, S_k otherwise
};
// unique k with 2^{-1/2-k} < |x_N - rho| < 2^{1/2-k}; throws on the
// measure-zero boundary of the strips
StripIndex strip_of(const SpecialLipschitzDomain& dom, const std::vector<double>& x);

struct BallDomain {
  int n = 2;  // complex dimension; ambient R^{2n}
  double eps_collar = 0.25;
  double rho(const std::vector<double>& x) const {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    return r2 - 1.0;
  }
  bool inside(const std::vector<double>& x) const { return rho(x) < 0; }
};

double delta(const BallDomain& dom, const std::vector<double>& x);  // |1 - |x||

// One cap chart: u = R x (signed permutation sending the cap axis to e_N),
// y' = kappa lambda u', y_N = kappa (1 - u_N). Inside the cap's angular range
// the ball becomes the graph domain y_N > rho_nu(y').
struct BallChart {
  int axis = 0, sign = 1;
  double kappa = 0.05, lambda = 5.5;
  SpecialLipschitzDomain omega;

  std::vector<double> to_chart(const std::vector<double>& x) const;
  std::vector<double> from_chart(const std::vector<double>& y) const;
};

struct BallAtlas {
  BallDomain ball;
  std::vector<BallChart> charts;  // 2*2n caps

  // chi_0 + sum_nu chi_nu^2 == 1 identically where the outer bump vanishes
  // (r <= 1.04, which contains the closed domain)
  double chi0(const std::vector<double>& x) const;
  double chi(int nu, const std::vector<double>& x) const;
  // all cutoffs at once (one normalization-sum evaluation)
  void chi_all(const std::vector<double>& x, double& c0, std::vector<double>& cv) const;
  // unnormalized bumps
  double beta0(const std::vector<double>& x) const;
  double beta(int nu, const std::vector<double>& x) const;
  double beta_out(const std::vector<double>& x) const;  // denominator-only outer bump
  double cover(const std::vector<double>& x) const;  // beta0^2 + beta_out^2 + sum beta^2
};

BallAtlas build_atlas(const BallDomain& ball, int M);

// boundary-adapted coordinates at a collar point z: s1 = rho(zeta),
// s2 = Im(zbar . (zeta - z)), t = components of zeta - z orthogonal to the
// complex normal line at z (2n-2 reals)
struct BoundaryChart {
  std::vector<double> z;  // 2n reals
  struct Coords {
    double s1 = 0, s2 = 0;
    std::vector<double> t;
  };
  Coords eval(const std::vector<double>& zeta) const;
};

BoundaryChart boundary_chart(const BallDomain& ball, const std::vector<double>& z);

// C^3 smoothstep on [0,1]
double smoothstep7(double t);
// C-infinity monotone step on [0,1]
double exp_step(double t);

}  // namespace dbar
