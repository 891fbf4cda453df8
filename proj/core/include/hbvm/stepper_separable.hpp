#pragma once

#include <span>

#include "hbvm/dense.hpp"
#include "hbvm/iteration.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/stepper_general.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

struct PhasePoint {
  Vector q;
  Vector p;
};

struct SeparableStepResult {
  PhasePoint state;
  StepStats stats;
};

/// Second-order formulation of HBVM(k,s) for H = ½pᵀp − U(q). The unknown
/// γ lives in position space (s blocks of size m); stages are
///   q = e ⊗ q0 + h c ⊗ p0 + h² (Iint X_s ⊗ I) γ,
/// and the step equation is
///   F(γ) = γ − (P_sᵀΩ ⊗ I) ∇U(q) = 0.
/// Newton/blended solvers reuse the first-order machinery with
/// h → h², X_s → X_s², ρ → ρ², G0 = ∇²U(q0).
class SeparableStepper {
 public:
  SeparableStepper(MethodTableau tableau, SeparableProblem problem, SolverConfig config = {});

  const MethodTableau& tableau() const noexcept { return tab_; }
  const SeparableProblem& problem() const noexcept { return prob_; }
  const SolverConfig& config() const noexcept { return cfg_; }
  void set_config(const SolverConfig& cfg);

  /// F(γ); also refreshes the cached stage gradients.
  BlockVector residual_q(const BlockVector& gamma, std::span<const double> q0,
                         std::span<const double> p0, double h);
  Matrix stages(const BlockVector& gamma, std::span<const double> q0,
                std::span<const double> p0, double h) const;

  /// ∇U at the stages of the most recent residual evaluation (k x m).
  const Matrix& stage_gradients() const noexcept { return grad_buf_; }

  /// q1 = q0 + h p0 + h² Σ_i (bᵀA)_i ∇U(q_i),  p1 = p0 + h Σ_i b_i ∇U(q_i).
  static PhasePoint advance_qp(std::span<const double> q0, std::span<const double> p0, double h,
                               const MethodTableau& tab, const Matrix& stage_gradients);

  LinearizedSystem linearize(std::span<const double> q0, double h) const;

  GammaSolution solve_fixed_point_q(std::span<const double> q0, std::span<const double> p0,
                                    double h);
  GammaSolution solve_newton_direct_q(std::span<const double> q0, std::span<const double> p0,
                                      double h);
  GammaSolution solve_blended_q(std::span<const double> q0, std::span<const double> p0,
                                double h);
  GammaSolution solve(std::span<const double> q0, std::span<const double> p0, double h,
                      SolverKind kind);

  /// γ = 0 initial guess, configured solver, advance with cached stage
  /// gradients.
  SeparableStepResult step(std::span<const double> q0, std::span<const double> p0, double h);

 private:
  long evaluate_residual(const BlockVector& gamma, std::span<const double> q0,
                         std::span<const double> p0, double h, BlockVector& out);

  MethodTableau tab_;
  SeparableProblem prob_;
  SolverConfig cfg_;
  Matrix stage_buf_;
  Matrix grad_buf_;
};

}  // namespace hbvm
