#pragma once

#include "fft.hpp"
#include "rlab/surface.hpp"

namespace rlab::detail {

// Phase x'.xi + x_n psi(xi) at node j, in turns.
inline double node_phase(const Density& d, std::size_t j, const double* x) {
  const int m = d.param_dim();
  const double* xi = d.node(j);
  double ph = x[m] * d.psi[j];
  for (int k = 0; k < m; ++k) ph += x[k] * xi[k];
  return ph;
}

// sum_j w_j f_j exp(sign 2 pi i phase_j(x)), sequential.
inline cplx phase_sum(const Density& d, const double* x, int sign) {
  cplx acc = 0;
  for (std::size_t j = 0; j < d.size(); ++j) acc += d.weights[j] * d.values[j] * cis_turns(sign * node_phase(d, j, x));
  return acc;
}

}  // namespace rlab::detail
