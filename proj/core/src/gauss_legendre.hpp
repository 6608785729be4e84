#pragma once

#include <vector>

namespace fracheat::detail {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

}  // namespace fracheat::detail
