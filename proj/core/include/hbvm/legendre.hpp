#pragma once

#include <span>

namespace hbvm {

/// Orthonormal shifted Legendre polynomial on [0,1]:
///   P̂_j(x) = sqrt(2j+1) * P_j(2x - 1),   ∫_0^1 P̂_i P̂_j = δ_ij.
/// Evaluated by the three-term recurrence for P_j. Throws std::domain_error
/// for x outside [0,1] and std::invalid_argument for j < 0.
double shifted_legendre(int degree, double x);

/// Writes P̂_0(x), ..., P̂_{out.size()-1}(x) into `out`.
void shifted_legendre_all(double x, std::span<double> out);

/// Standard Legendre P_n(t) and P_n'(t) on [-1,1]; used by the Gauss rule.
struct LegendreValue {
  double value;
  double derivative;
};
LegendreValue legendre_with_derivative(int degree, double t);

}  // namespace hbvm
