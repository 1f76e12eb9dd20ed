#pragma once
// Finite differences: order-2 central stencils (one-sided second order at box
// faces), iterated gradients, and the Wirtinger dbar on form fields.
#include "dbar/grid.hpp"

namespace dbar {

// d/dx_axis by central differences, one-sided 2nd-order at the two faces.
SampledField derivative(const SampledField& f, int axis);

// All |alpha| = k derivatives, ordered like derivative_multi_indices(N, k).
std::vector<SampledField> gradient(const SampledField& f, int k);

// Multi-indices alpha with |alpha| = k over N axes, lexicographic.
std::vector<std::vector<int>> derivative_multi_indices(int N, int k);

// dbar on a (0,q)-form, q < n: components are antisymmetrized
// d/dzbar_a = (d/dx_a + i d/dy_a)/2 of the inputs.
FormField dbar(const FormField& phi);

}  // namespace dbar
