#include "hbvm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hbvm/legendre.hpp"

namespace hbvm {

Matrix QuadratureRule::omega() const {
  Matrix w(size(), size());
  for (std::size_t i = 0; i < size(); ++i) w(i, i) = weights[i];
  return w;
}

QuadratureRule gauss_rule(int k) {
  if (k < 1) throw std::invalid_argument("gauss_rule: need at least one node");
  if (k > max_gauss_nodes) throw std::invalid_argument("gauss_rule: more than 64 nodes unsupported");

  QuadratureRule rule;
  rule.nodes.resize(k);
  rule.weights.resize(k);

  // Roots come in ±t pairs; solve for the non-negative half and mirror.
  const int half = (k + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    LegendreValue pv{};
    for (int it = 0; it < 100; ++it) {
      pv = legendre_with_derivative(k, t);
      const double dt = pv.value / pv.derivative;
      t -= dt;
      if (std::abs(dt) <= 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    pv = legendre_with_derivative(k, t);
    const double w = 2.0 / ((1.0 - t * t) * pv.derivative * pv.derivative);
    // t decreases with i; t_i > 0 maps to the upper half of [0,1].
    const int hi = k - 1 - i;
    const int lo = i;
    rule.nodes[hi] = 0.5 * (1.0 + t);
    rule.nodes[lo] = 0.5 * (1.0 - t);
    rule.weights[hi] = 0.5 * w;
    rule.weights[lo] = 0.5 * w;
  }
  if (k % 2 == 1) rule.nodes[k / 2] = 0.5;
  return rule;
}

}  // namespace hbvm
