#pragma once
// Universal extension operator on special Lipschitz domains, its commutators,
// and the globalization to the ball via the cap atlas.
#include "dbar/cone.hpp"
#include "dbar/domain.hpp"
#include "dbar/fd.hpp"

namespace dbar {

struct ExtensionOperator {
  ConeDyadicPair pair;
  SpecialLipschitzDomain domain;
  int J = 4;
};

// level-j kernels as lattice measures (spacing pair.h * 2^{-j})
SampledField level_kernel_phi(const ConeDyadicPair& pair, int j);
SampledField level_kernel_psi(const ConeDyadicPair& pair, int j);

// re-grid a lattice measure onto a finer lattice of spacing h (densities
// rescale by the cell-volume ratio; spacings must divide evenly)
SampledField kernel_on_lattice(const SampledField& k, const std::vector<double>& h);

// E f = sum_{j<=J} psi_j * (indicator * (phi_j * f)), restricted to `window`
SampledField extend(const ExtensionOperator& op, const SampledField& f, const GridSpec& window);
// same, but returns the accumulated operator after each J in Js (ascending)
std::vector<SampledField> extend_snapshots(const ExtensionOperator& op, const SampledField& f,
                                           const GridSpec& window, const std::vector<int>& Js);
// quadratic-cost serial reference (small grids only)
SampledField extend_direct(const ExtensionOperator& op, const SampledField& f,
                           const GridSpec& window);

// D_a(Ef) - E(D_a f) on the window
SampledField commutator_D(const ExtensionOperator& op, const SampledField& f, int axis,
                          const GridSpec& window);

// || delta^w g ||_{L^p} over the grid points of g selected by `sel`
double weighted_lp(const SampledField& g, const SpecialLipschitzDomain& dom, double w, double p,
                   const std::function<bool(const std::vector<double>&)>& sel);

// ---- globalization on the ball ----

using ScalarFunc = std::function<cd(const std::vector<double>&)>;

// analytic (0,q)-form: components indexed like FormField (increasing multi-indices)
struct FormFunc {
  int n = 2, q = 1;
  std::vector<ScalarFunc> comps;
};

struct GlobalExtension {
  BallAtlas atlas;
  ConeParams patch_prm;  // kernel geometry on the chart lattice
  ConeDyadicPair pair;   // shared by all charts (identical chart geometry)
  GridSpec chart_fbox;   // chart-coordinate sampling grid for chi_nu * f
  GridSpec chart_window; // chart-coordinate output grid
  int J = 0;
};

// res = transverse cells per kappa*lambda, res_d = depth cells per kappa
// (anisotropic: the cutoffs vary faster in depth than transversally)
GlobalExtension build_global_extension(const BallAtlas& atlas, int res, int res_d, int L_steps,
                                       int K_tot);

// sample a scalar function on a grid
SampledField sample_func(const GridSpec& g, const ScalarFunc& f);
// multilinear interpolation; zero outside the grid box
cd interp(const SampledField& f, const std::vector<double>& x);

// E_nu(g) for a scalar g given in global coordinates, result on chart_window
SampledField extend_patch(const GlobalExtension& ge, int nu, const ScalarFunc& g);

// E phi = chi0 phi + sum_nu chi_nu E_nu(chi_nu phi), sampled on gg
SampledField extend_global_scalar(const GlobalExtension& ge, const ScalarFunc& f,
                                  const GridSpec& gg);
FormField extend_global(const GlobalExtension& ge, const FormFunc& phi, const GridSpec& gg);

// [dbar, E] phi as a (0,q+1)-form on gg, assembled patchwise:
// (dbar chi0)^phi + sum chi_nu [dbar,E_nu](chi_nu phi) + (dbar chi_nu)^E_nu(chi_nu phi)
//                 + chi_nu E_nu((dbar chi_nu)^phi).
// dphi = analytic dbar of phi (pass zero comps for closed phi).
FormField commutator_dbar(const GlobalExtension& ge, const FormFunc& phi, const FormFunc& dphi,
                          const GridSpec& gg);

// numeric Wirtinger derivative d/dzbar_a of a smooth global scalar (central FD)
cd dbar_point(const ScalarFunc& f, int a, const std::vector<double>& x, double step = 1e-4);

}  // namespace dbar
