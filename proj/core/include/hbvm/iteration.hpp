#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hbvm/dense.hpp"

namespace hbvm {

enum class SolverKind { fixed_point, newton_direct, blended };

std::string_view to_string(SolverKind kind) noexcept;
/// Accepts "fixed-point", "newton" (or "newton-direct") and "blended".
SolverKind parse_solver_kind(std::string_view name);

/// Stopping rule: ||Δ||_∞ <= abs_tol + rel_tol * ||γ||_∞ after the update.
/// Divergence: `divergence_window` consecutive growing corrections, or any
/// non-finite value.
struct SolverConfig {
  SolverKind kind = SolverKind::blended;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int max_iter = 100;
  int divergence_window = 5;

  void validate() const;
};

enum class StepStatus { converged, max_iterations, diverged, non_finite, singular_matrix };

std::string_view to_string(StepStatus status) noexcept;

struct StepStats {
  int iterations = 0;
  bool converged = false;
  StepStatus status = StepStatus::max_iterations;
  /// ||F(γ)||_∞ at the last residual evaluation.
  double residual_norm = 0.0;
  /// Last correction ||Δ||_∞.
  double correction_norm = 0.0;
  long gradient_evaluations = 0;
  int factorizations = 0;
  /// Quadrature stage at which a non-finite gradient appeared, else -1.
  int failed_stage = -1;

  StepStats& operator+=(const StepStats& other);
};

/// Thrown by residual evaluations when ∇H (or ∇U) returns a non-finite
/// value at some stage.
class NonFiniteStage : public std::runtime_error {
 public:
  explicit NonFiniteStage(int stage)
      : std::runtime_error("non-finite gradient at stage " + std::to_string(stage)),
        stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

/// The linearized stage system (I − step · X ⊗ G0) Δ = η shared by both
/// formulations. First order: X = X_s, step = h, ρ = ρ_s, G0 = J∇²H(y0).
/// Second order: X = X_s², step = h², ρ = ρ_s², G0 = ∇²U(q0).
struct LinearizedSystem {
  Matrix x;
  Matrix x_inv;
  double step = 0.0;
  double rho = 0.0;
  Matrix g0;

  std::size_t blocks() const noexcept { return x.rows(); }
  std::size_t block_dim() const noexcept { return g0.rows(); }
};

/// I − step · (X ⊗ G0), formed densely.
Matrix newton_matrix(const LinearizedSystem& sys);

/// Factorization of I − ρ·step·G0. θ-apply is a block-wise solve with it.
struct BlendedOperators {
  LUFactor weight_factor;

  bool singular() const noexcept { return weight_factor.singular(); }
  /// θ v = (I_s ⊗ (I − ρ step G0)^{-1}) v
  BlockVector theta_apply(const BlockVector& v) const;
};

BlendedOperators blended_step_matrices(const LinearizedSystem& sys);

/// One blended sweep Δ_next = Δ − θ T(Δ) with
///   T(Δ) = θ[(I − step X⊗G0)Δ − η] + (I − θ)[ρ(X^{-1}⊗I − step I⊗G0)Δ − η1].
BlockVector blended_sweep(const LinearizedSystem& sys, const BlendedOperators& ops,
                          const BlockVector& delta, const BlockVector& eta,
                          const BlockVector& eta1);

/// The sweep from Δ = 0, where it reduces to Δ = θ(η1 + θ(η − η1)).
/// This is what the nonlinear blended iteration performs each outer step.
BlockVector blended_sweep_from_zero(const BlendedOperators& ops, const BlockVector& eta,
                                    const BlockVector& eta1);

/// η1 = ρ (X^{-1} ⊗ I) η
BlockVector blended_rhs(const LinearizedSystem& sys, const BlockVector& eta);

/// Evaluates F(γ) into `out`; may throw NonFiniteStage. Returns the number of
/// gradient evaluations performed.
using ResidualFunction = std::function<long(const BlockVector& gamma, BlockVector& out)>;

/// Runs the configured solver on F(γ) = 0 starting from `gamma`. The
/// LinearizedSystem is only consulted by newton_direct and blended. One
/// iteration = one residual evaluation.
StepStats solve_stage_system(const SolverConfig& cfg, const ResidualFunction& residual,
                             const LinearizedSystem* sys, BlockVector& gamma);

}  // namespace hbvm
