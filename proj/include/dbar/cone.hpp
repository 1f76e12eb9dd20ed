#pragma once
// Cone-supported dyadic resolution pair (phi_j, psi_j). Level-0 kernel is a
// tabulated measure on a lattice: a smooth seed supported in
// Theta^{-1}([1,L]^N) with a least-norm correction enforcing exact discrete
// moments. Companions psi are assembled by discrete convolutions so that
// sum_j phi_hat_j psi_hat_j telescopes exactly.
#include "dbar/grid.hpp"

namespace dbar {

struct ConeParams {
  int N = 2;
  double d0 = 1.05;       // apex depth: supp phi0 in {x_N <= -d0}
  double L = 9.0;         // seed support Theta^{-1}([1,L]^N)
  int K_tot = 8;          // vanishing moments 1..K_tot (mass = 1)
  double slope = 0.3;     // half-aperture tangent of the support cone
  std::vector<double> h;  // level-0 lattice spacing per axis
  int J_max = 8;
  double tail_eps = 1e-8;
};

// Theta with Theta^{-1}([1,oo)^N) inside the cone {|x'| <= slope |x_N|, x_N < 0}
// shifted to depth d0: the orthant axis goes to -e_N via a Householder
// reflection, transverse directions shrink to the requested slope.
std::vector<std::vector<double>> theta_map(int N, double d0, double slope);

// apply y = Theta x
std::vector<double> apply_matrix(const std::vector<std::vector<double>>& m, const std::vector<double>& x);

// h^N sum v(x) x^alpha over the lattice
double discrete_moment(const SampledField& f, const std::vector<int>& alpha);
// integral of |f| over {x_N > c}
double mass_above(const SampledField& f, double c);
// DTFT: h^N sum v(x) exp(-i xi.x)
cd dtft(const SampledField& f, const std::vector<double>& xi);

// Seed product of bump profiles g_bump(theta_i(x), L), then least-norm
// correction to exact discrete moments delta_{alpha,0}, |alpha| <= K_tot.
// Throws on cone-condition violation or an infeasible moment system.
SampledField build_phi0(const ConeParams& prm, const std::vector<std::vector<double>>& theta);

struct ConeDyadicPair {
  ConeParams prm;
  std::vector<std::vector<double>> theta;
  SampledField phi0;  // = A0 on the level-0 lattice
  SampledField phi1;  // A1 - A0 on the half lattice
  SampledField psi0;  // 2 A0 - A0*A0*A0 on the level-0 lattice
  SampledField psi1;  // 2(A1+A0) - (A1+A0)*(A1*A1 + A0*A0) on the half lattice

  // symbols; A_hat(xi) is the DTFT of phi0, M_hat_j(xi) = A_hat(2^{-j} xi)
  cd symbol_A(const std::vector<double>& xi) const;
  cd symbol_phi(int j, const std::vector<double>& xi) const;  // M_j - M_{j-1}
  cd symbol_psi(int j, const std::vector<double>& xi) const;
  // sum_{j<=J} phi_hat_j psi_hat_j; equals 2 M_J^2 - M_J^4 identically
  cd partial_sum(int J, const std::vector<double>& xi) const;

 private:
  // cached nonzero support of phi0 for symbol evaluation
  mutable std::vector<std::vector<double>> pts_;
  mutable std::vector<double> wts_;
  void ensure_cache() const;
};

ConeDyadicPair build_pair(const ConeParams& prm);

// a*fa + b*fb on the union bounding box (lattices must align)
SampledField combine(const SampledField& fa, double a, const SampledField& fb, double b);
// represent a lattice measure on a lattice refined by `factor` per axis
SampledField refine_lattice(const SampledField& f, int factor);
// dilated measure 2^{Nj} f(2^j x) on the correspondingly shrunk lattice
SampledField dilate_measure(const SampledField& f, int j);

// sup over sample points of |sum_m c_m (S_J(xi_m) - 1) e^{i xi_m x}| for a
// band-limited test function given by frequencies and coefficients.
double reconstruction_error(const ConeDyadicPair& pair, int J,
                            const std::vector<std::vector<double>>& freqs,
                            const std::vector<cd>& coeffs, int x_samples, unsigned seed);

}  // namespace dbar
