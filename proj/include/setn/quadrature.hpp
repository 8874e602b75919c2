#pragma once

#include <vector>

namespace setn {

struct QuadratureRule {
  std::vector<double> nodes;    // ascending, in [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule (exact for polynomials of degree 2n - 1).
QuadratureRule gauss_legendre(int n);

}  // namespace setn
