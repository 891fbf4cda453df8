#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hbvm/dense.hpp"

namespace hbvm {

using ScalarField = std::function<double(std::span<const double>)>;
using GradientField = std::function<void(std::span<const double> x, std::span<double> grad)>;
using HessianField = std::function<Matrix(std::span<const double>)>;

/// Canonical system y' = J ∇H(y), y = (q, p) in R^{2m},
/// J = [[0, I_m], [-I_m, 0]]. Callbacks must be pure.
struct HamiltonianProblem {
  std::string name;
  std::size_t m = 0;
  ScalarField hamiltonian;
  GradientField gradient;
  HessianField hessian;
  Vector y0;

  std::size_t dim() const noexcept { return 2 * m; }
  double energy(std::span<const double> y) const { return hamiltonian(y); }
};

/// H(q,p) = ½ pᵀp − U(q), equivalently q'' = ∇U(q). Note the minus sign
/// on U.
struct SeparableProblem {
  std::string name;
  std::size_t m = 0;
  ScalarField potential;
  GradientField potential_gradient;
  HessianField potential_hessian;
  Vector q0;
  Vector p0;

  double energy(std::span<const double> q, std::span<const double> p) const;
  /// Energy of a stacked state y = (q, p).
  double energy(std::span<const double> y) const;
};

/// out = J v for v in R^{2m}.
void apply_j(std::span<const double> v, std::span<double> out);
/// J as a dense 2m x 2m matrix.
Matrix j_matrix(std::size_t m);

/// U(q) = 10^4 q^2 (4/5 q^3 - 3/4 q^2 - 2/3 q + 1/2), q0 = 0, p0 = 1.
SeparableProblem quintic_oscillator();
/// U(q) = cos q - 1, so H = ½p² + 1 - cos q.
SeparableProblem pendulum(double q0 = 1.0, double p0 = 0.0);
/// U(q) = -½ q², so H = ½(p² + q²); starts at (1, 0).
SeparableProblem harmonic_oscillator();

/// Looks up "quintic", "pendulum" or "harmonic". Throws std::invalid_argument
/// for anything else.
SeparableProblem separable_problem_by_name(const std::string& name);
std::vector<std::string> builtin_problem_names();

/// Lifts a separable problem to y = (q, p):
///   ∇H = (−∇U(q), p),  ∇²H = blockdiag(−∇²U(q), I_m).
HamiltonianProblem as_first_order(const SeparableProblem& problem);

/// Replaces the Hessian callback with central differences of the gradient.
HamiltonianProblem with_fd_hessian(HamiltonianProblem problem, double fd_step = 1e-5);
SeparableProblem with_fd_hessian(SeparableProblem problem, double fd_step = 1e-5);

Matrix fd_hessian(const GradientField& gradient, std::span<const double> x, double fd_step);

struct DerivativeReport {
  double max_gradient_deviation = 0.0;
  double max_hessian_deviation = 0.0;
  double max_hessian_asymmetry = 0.0;
  double tolerance = 0.0;
  std::vector<std::size_t> non_finite_points;
  bool passed = false;
};

/// Compares analytic gradients/Hessians with central differences at each
/// point. Deviations are |analytic − fd| / max(1, |analytic|). fd_step must
/// lie in (0, 1e-3]; the default tolerance 1e-6 is calibrated for 1e-5.
DerivativeReport check_derivatives(const HamiltonianProblem& problem,
                                   std::span<const Vector> points,
                                   double fd_step = 1e-5, double tolerance = 1e-6);
/// Same check on U, ∇U, ∇²U with points in q-space.
DerivativeReport check_derivatives(const SeparableProblem& problem,
                                   std::span<const Vector> points,
                                   double fd_step = 1e-5, double tolerance = 1e-6);

}  // namespace hbvm
