#pragma once

#include <complex>
#include <vector>

#include "hbvm/dense.hpp"
#include "hbvm/quadrature.hpp"

namespace hbvm {

inline constexpr int max_degree_s = 10;

/// All (k,s)-dependent constants of HBVM(k,s). Row index = quadrature node,
/// column index = basis function P̂_{j}, j = 0..s-1 (or 0..s).
///
/// Immutable after build_tableau(); safe to share between threads.
struct MethodTableau {
  int k = 0;
  int s = 0;
  QuadratureRule quad;

  Matrix basis;           ///< k x s,   (P̂_{j}(c_i))
  Matrix basis_ext;       ///< k x s+1, (P̂_{j}(c_i)), j = 0..s
  Matrix integrals;       ///< k x s,   (∫_0^{c_i} P̂_{j}), built as basis_ext * x_hat
  Matrix x;               ///< s x s tridiagonal X_s
  Matrix x_hat;           ///< s+1 x s, X_s over ξ_s e_s^T
  Matrix x_inv;           ///< X_s^{-1}
  Matrix x_squared;       ///< X_s^2
  Matrix x_inv_squared;   ///< X_s^{-2}
  Matrix projection;      ///< s x k,   basis^T Ω
  Matrix butcher;         ///< k x k,   A = integrals * projection
  Matrix integrals_x;     ///< k x s,   integrals * X_s (second-order stage map)
  std::vector<double> weights_a;  ///< b^T A, k entries (second-order q update)
  double rho = 0.0;       ///< ρ_s = min |λ(X_s)|

  std::vector<double> const& nodes() const noexcept { return quad.nodes; }
  std::vector<double> const& weights() const noexcept { return quad.weights; }
};

/// ξ_j = 1 / (2 sqrt(4j^2 - 1)), j >= 1.
double xi(int j);

/// The s x s matrix X_s with X_s(0,0) = 1/2, X_s(j,j-1) = ξ_j, X_s(j-1,j) = -ξ_j.
Matrix x_matrix(int s);

/// Coefficients c_0..c_s (ascending powers) of det(λ I - X_s), from the
/// three-term recurrence p_j = λ p_{j-1} + ξ_{j-1}^2 p_{j-2}.
std::vector<double> x_characteristic_polynomial(int s);

/// Eigenvalues of X_s: Durand-Kerner on the characteristic polynomial, then
/// a Newton polish of each root.
std::vector<std::complex<double>> x_eigenvalues(int s);

/// ρ_s = min{|λ| : λ ∈ σ(X_s)}, for 1 <= s <= 10.
double rho_opt(int s);

/// Requires 1 <= s <= k, s <= 10, k <= 64.
MethodTableau build_tableau(int k, int s);

}  // namespace hbvm
