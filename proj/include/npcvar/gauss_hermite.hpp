#pragma once

#include <vector>

namespace npcvar {

// Nodes and weights for Gauss-Hermite quadrature with weight exp(-x^2):
//   integral f(x) exp(-x^2) dx  ~=  sum_i w[i] f(x[i]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Computed by Newton iteration on the Hermite recurrence; cached per order.
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace npcvar
