#pragma once
// Double-form integral kernels via a bitmask exterior-algebra engine: the
// Bochner-Martinelli kernel K0, the transition kernel K01 built from the
// ball's Leray map W = conj(zeta), and the lower-bound checks for the
// holomorphic pairing Phi.
#include <cstdint>
#include <vector>

#include "dbar/grid.hpp"

namespace dbar {

// one-form generators, bit layout over 3n bits:
//   dzeta_i -> bit i, dzetabar_i -> bit n+i, dzbar_i -> bit 2n+i
struct FormTerm {
  uint32_t mask = 0;
  cd c;
};
using Form = std::vector<FormTerm>;

// sign of merging canonical blades a ^ b; 0 if they share a generator
int wedge_sign(uint32_t a, uint32_t b);
Form wedge(const Form& a, const Form& b);
void form_simplify(Form& f);  // merge duplicate masks, drop zero terms

using CPoint = std::vector<cd>;

// complex coordinates from real samples, z_a = x[2a] + i x[2a+1]
CPoint to_complex(const std::vector<double>& x);

struct LerayKernel {
  int n = 2;
  double scale = 1.0;      // W = scale * conj(zeta); K01 is scale-invariant
  double phi_floor = 1e-14;
};

// Phi(z, zeta) = W . (zeta - z); for the ball scale * (|zeta|^2 - zetabar.z)
cd eval_Phi(const LerayKernel& k, const CPoint& z, const CPoint& zeta);

// full mixed-bidegree kernel forms
Form K0_form(int n, const CPoint& z, const CPoint& zeta);
Form K01_form(const LerayKernel& k, const CPoint& z, const CPoint& zeta);

// pairing extraction against (0,m)-in-zeta inputs: out[J][I] is the
// Euclidean-volume coefficient with J a dzbar multi-index of length q-1 and
// I a dzetabar multi-index of length m, both in increasing lex order
std::vector<std::vector<cd>> pair_form(const Form& f, int n, int q, int m);

// m = q for K0 (pairs with E phi), m = q+1 for K01 (pairs with [dbar,E] phi)
std::vector<std::vector<cd>> eval_K0(int n, int q, const CPoint& z, const CPoint& zeta);
std::vector<std::vector<cd>> eval_K01(const LerayKernel& k, int n, int q, const CPoint& z,
                                      const CPoint& zeta);

}  // namespace dbar
