#pragma once

#include <cstddef>
#include <vector>

#include "hbvm/dense.hpp"

namespace hbvm {

/// k-point rule on [0,1]: nodes strictly increasing in (0,1), positive
/// weights summing to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  /// diag(b)
  Matrix omega() const;
};

inline constexpr int max_gauss_nodes = 64;

/// Gauss-Legendre rule with k nodes mapped to [0,1], exact for polynomials
/// of degree <= 2k-1. Nodes come from Newton iteration on P_k started at
/// Chebyshev points; weights from 2 / ((1-t^2) P_k'(t)^2).
QuadratureRule gauss_rule(int k);

}  // namespace hbvm
