#pragma once

#include <vector>

namespace pe {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Supported orders: 8, 16, 32. Returns a cached rule.
const GaussRule& gauss_legendre(int order);

}  // namespace pe
