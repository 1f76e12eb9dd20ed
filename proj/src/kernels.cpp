#include "dbar/kernels.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace dbar {

int wedge_sign(uint32_t a, uint32_t b) {
  if (a & b) return 0;
  int par = 0;
  for (uint32_t m = b; m; m &= m - 1) {
    uint32_t bit = m & -m;
    par ^= std::popcount(a & ~(2 * bit - 1)) & 1;
  }
  return par ? -1 : 1;
}

Form wedge(const Form& a, const Form& b) {
  Form out;
  out.reserve(a.size() * b.size());
  for (const FormTerm& s : a)
    for (const FormTerm& t : b) {
      int sg = wedge_sign(s.mask, t.mask);
      if (sg) out.push_back({s.mask | t.mask, double(sg) * s.c * t.c});
    }
  form_simplify(out);
  return out;
}

void form_simplify(Form& f) {
  Form out;
  for (const FormTerm& t : f) {
    bool merged = false;
    for (FormTerm& o : out)
      if (o.mask == t.mask) {
        o.c += t.c;
        merged = true;
        break;
      }
    if (!merged) out.push_back(t);
  }
  Form kept;
  for (const FormTerm& t : out)
    if (std::abs(t.c) > 0) kept.push_back(t);
  f = std::move(kept);
}

CPoint to_complex(const std::vector<double>& x) {
  CPoint z(x.size() / 2);
  for (size_t a = 0; a < z.size(); ++a) z[a] = cd(x[2 * a], x[2 * a + 1]);
  return z;
}

cd eval_Phi(const LerayKernel& k, const CPoint& z, const CPoint& zeta) {
  cd s = 0;
  for (int i = 0; i < k.n; ++i) s += k.scale * std::conj(zeta[i]) * (zeta[i] - z[i]);
  return s;
}

static Form pow_wedge(const Form& f, int p) {
  Form out = {{0, cd(1)}};
  for (int k = 0; k < p; ++k) out = wedge(out, f);
  return out;
}

static cd prefactor(int n) {
  cd c = 1;
  for (int k = 0; k < n; ++k) c /= cd(0, 2 * M_PI);
  return c;
}

// <b, dzeta> and its dbar_{zeta,z} for b = (zetabar - zbar)/|zeta - z|^2
static void bm_forms(int n, const CPoint& z, const CPoint& zeta, Form& A, Form& dA) {
  double r2 = 0;
  for (int i = 0; i < n; ++i) r2 += std::norm(zeta[i] - z[i]);
  if (r2 == 0) throw std::runtime_error("singularity error: zeta == z");
  A.clear();
  dA.clear();
  for (int i = 0; i < n; ++i) {
    cd bi = std::conj(zeta[i] - z[i]) / r2;
    A.push_back({uint32_t(1) << i, bi});
    for (int j = 0; j < n; ++j) {
      cd cij = -std::conj(zeta[i] - z[i]) * (zeta[j] - z[j]) / (r2 * r2);
      if (i == j) cij += 1.0 / r2;
      if (std::abs(cij) == 0) continue;
      // c_ij (dzetabar_j - dzbar_j) ^ dzeta_i
      int s1 = wedge_sign(uint32_t(1) << (n + j), uint32_t(1) << i);
      int s2 = wedge_sign(uint32_t(1) << (2 * n + j), uint32_t(1) << i);
      dA.push_back({(uint32_t(1) << (n + j)) | (uint32_t(1) << i), double(s1) * cij});
      dA.push_back({(uint32_t(1) << (2 * n + j)) | (uint32_t(1) << i), double(-s2) * cij});
    }
  }
}

Form K0_form(int n, const CPoint& z, const CPoint& zeta) {
  Form A, dA;
  bm_forms(n, z, zeta, A, dA);
  return wedge(Form{{0, prefactor(n)}}, wedge(A, pow_wedge(dA, n - 1)));
}

Form K01_form(const LerayKernel& k, const CPoint& z, const CPoint& zeta) {
  int n = k.n;
  Form A, dA;
  bm_forms(n, z, zeta, A, dA);
  cd Phi = eval_Phi(k, z, zeta);
  if (std::abs(Phi) < k.phi_floor)
    throw std::runtime_error("near-singularity error: |Phi| below floor");
  // <w, dzeta> with w = W/Phi, W = scale * conj(zeta); dbar_z of both
  // vanishes for the ball, so only dbar_zeta appears in dB
  Form B, dB;
  for (int i = 0; i < n; ++i) {
    cd wi = k.scale * std::conj(zeta[i]) / Phi;
    B.push_back({uint32_t(1) << i, wi});
    for (int j = 0; j < n; ++j) {
      cd eij = -k.scale * std::conj(zeta[i]) * k.scale * (zeta[j] - z[j]) / (Phi * Phi);
      if (i == j) eij += k.scale / Phi;
      if (std::abs(eij) == 0) continue;
      int s1 = wedge_sign(uint32_t(1) << (n + j), uint32_t(1) << i);
      dB.push_back({(uint32_t(1) << (n + j)) | (uint32_t(1) << i), double(s1) * eij});
    }
  }
  Form sum;
  for (int i = 0; i + 0 <= n - 2; ++i) {
    int j = n - 2 - i;
    Form t = wedge(pow_wedge(dA, i), pow_wedge(dB, j));
    for (const FormTerm& ft : t) sum.push_back(ft);
  }
  form_simplify(sum);
  Form lead = wedge(A, B);
  return wedge(Form{{0, prefactor(n)}}, wedge(lead, sum));
}

std::vector<std::vector<cd>> pair_form(const Form& f, int n, int q, int m) {
  auto Js = increasing_multi_indices(n, q - 1);
  if (m > n) return std::vector<std::vector<cd>>(Js.size());  // nothing to pair with
  auto Is = increasing_multi_indices(n, m);
  uint32_t full_z = (uint32_t(1) << n) - 1;
  // canonical order puts the zeta-volume first, then dzbar_J; converting
  // dzeta_1..dzeta_n ^ dzetabar_1..dzetabar_n to the Euclidean volume gives
  // (-1)^{n(n-1)/2} (-2i)^n
  cd vol = 1;
  for (int k = 0; k < n; ++k) vol *= cd(0, -2);
  if ((n * (n - 1) / 2) % 2) vol = -vol;
  std::vector<uint32_t> imask(Is.size(), 0), jmask(Js.size(), 0);
  for (size_t a = 0; a < Is.size(); ++a)
    for (int i : Is[a]) imask[a] |= uint32_t(1) << (n + i);
  for (size_t a = 0; a < Js.size(); ++a)
    for (int i : Js[a]) jmask[a] |= uint32_t(1) << (2 * n + i);
  std::vector<std::vector<cd>> out(Js.size(), std::vector<cd>(Is.size(), cd(0)));
  for (const FormTerm& t : f) {
    if ((t.mask & full_z) != full_z) continue;  // needs full dzeta degree
    uint32_t zb = t.mask >> (2 * n);
    uint32_t need = full_z & ~((t.mask >> n) & full_z);  // complementary dzetabar
    for (size_t ji = 0; ji < Js.size(); ++ji) {
      if (zb != (jmask[ji] >> (2 * n))) continue;
      for (size_t ii = 0; ii < Is.size(); ++ii) {
        if ((imask[ii] >> n) != need) continue;
        int sg = wedge_sign(t.mask, imask[ii]);
        out[ji][ii] += double(sg) * t.c * vol;
      }
    }
  }
  return out;
}

std::vector<std::vector<cd>> eval_K0(int n, int q, const CPoint& z, const CPoint& zeta) {
  return pair_form(K0_form(n, z, zeta), n, q, q);
}

std::vector<std::vector<cd>> eval_K01(const LerayKernel& k, int n, int q, const CPoint& z,
                                      const CPoint& zeta) {
  return pair_form(K01_form(k, z, zeta), n, q, q + 1);
}

}  // namespace dbar
