#pragma once

#include <span>

#include "hbvm/dense.hpp"
#include "hbvm/iteration.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

struct GammaSolution {
  BlockVector gamma;  ///< s blocks of dimension 2m
  StepStats stats;
};

struct StepResult {
  Vector y1;
  StepStats stats;
};

/// HBVM(k,s) for y' = J∇H(y) in the reduced γ-formulation. The unknown γ_j
/// is the coefficient of σ' along P̂_j; stages are
///   Y = e ⊗ y0 + h (Iint ⊗ I) γ,
/// and the step equation is
///   F(γ) = γ − (P_sᵀΩ ⊗ J) ∇H(Y) = 0.
///
/// Holds scratch buffers: one instance per thread.
class GeneralStepper {
 public:
  GeneralStepper(MethodTableau tableau, HamiltonianProblem problem, SolverConfig config = {});

  const MethodTableau& tableau() const noexcept { return tab_; }
  const HamiltonianProblem& problem() const noexcept { return prob_; }
  const SolverConfig& config() const noexcept { return cfg_; }
  void set_config(const SolverConfig& cfg);

  /// F(γ). Throws NonFiniteStage if ∇H is not finite at some stage.
  BlockVector residual(const BlockVector& gamma, std::span<const double> y0, double h);
  /// Stage values Y_i = y0 + h Σ_j Iint(i,j) γ_j, one row per node.
  Matrix stages(const BlockVector& gamma, std::span<const double> y0, double h) const;

  /// y1 = y0 + h γ_0 (only P̂_0 has non-zero integral over [0,1]).
  static Vector advance(std::span<const double> y0, double h, const BlockVector& gamma);

  /// Linearization frozen at y0: X_s, h, ρ_s, G0 = J ∇²H(y0).
  LinearizedSystem linearize(std::span<const double> y0, double h) const;

  GammaSolution solve_fixed_point(std::span<const double> y0, double h);
  GammaSolution solve_newton_direct(std::span<const double> y0, double h);
  GammaSolution solve_blended(std::span<const double> y0, double h);
  GammaSolution solve(std::span<const double> y0, double h, SolverKind kind);

  /// γ = 0 initial guess, configured solver, then advance.
  StepResult step(std::span<const double> y0, double h);

 private:
  long evaluate_residual(const BlockVector& gamma, std::span<const double> y0, double h,
                         BlockVector& out);

  MethodTableau tab_;
  HamiltonianProblem prob_;
  SolverConfig cfg_;
  Matrix stage_buf_;
  Matrix grad_buf_;
};

}  // namespace hbvm
