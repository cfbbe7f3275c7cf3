#pragma once

#include <vector>

namespace finsler::detail {

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1], ascending
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule; cached per m.
const GaussRule& gauss_legendre(int m);

}  // namespace finsler::detail
