#include "hbvm/iteration.hpp"

#include <cmath>
#include <limits>

namespace hbvm {

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::fixed_point: return "fixed-point";
    case SolverKind::newton_direct: return "newton";
    case SolverKind::blended: return "blended";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "fixed-point") return SolverKind::fixed_point;
  if (name == "newton" || name == "newton-direct") return SolverKind::newton_direct;
  if (name == "blended") return SolverKind::blended;
  throw std::invalid_argument("unknown solver '" + std::string(name) +
                              "' (expected fixed-point, newton or blended)");
}

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (divergence_window < 1)
    throw std::invalid_argument("SolverConfig: divergence_window must be >= 1");
}

std::string_view to_string(StepStatus status) noexcept {
  switch (status) {
    case StepStatus::converged: return "converged";
    case StepStatus::max_iterations: return "max-iterations";
    case StepStatus::diverged: return "diverged";
    case StepStatus::non_finite: return "non-finite";
    case StepStatus::singular_matrix: return "singular-matrix";
  }
  return "unknown";
}

StepStats& StepStats::operator+=(const StepStats& other) {
  iterations += other.iterations;
  gradient_evaluations += other.gradient_evaluations;
  factorizations += other.factorizations;
  converged = converged && other.converged;
  return *this;
}

Matrix newton_matrix(const LinearizedSystem& sys) {
  Matrix m = kron(sys.x, sys.g0);
  m *= -sys.step;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
  return m;
}

BlockVector BlendedOperators::theta_apply(const BlockVector& v) const {
  BlockVector out = v;
  for (std::size_t j = 0; j < out.blocks(); ++j) weight_factor.solve_in_place(out.block(j));
  return out;
}

BlendedOperators blended_step_matrices(const LinearizedSystem& sys) {
  if (!(sys.rho > 0.0)) throw std::invalid_argument("blended_step_matrices: rho must be positive");
  Matrix w = sys.g0;
  w *= -sys.rho * sys.step;
  for (std::size_t i = 0; i < w.rows(); ++i) w(i, i) += 1.0;
  return BlendedOperators{LUFactor(w)};
}

BlockVector blended_rhs(const LinearizedSystem& sys, const BlockVector& eta) {
  BlockVector eta1 = kron_scalar_apply(sys.x_inv, eta);
  eta1 *= sys.rho;
  return eta1;
}

BlockVector blended_sweep(const LinearizedSystem& sys, const BlendedOperators& ops,
                          const BlockVector& delta, const BlockVector& eta,
                          const BlockVector& eta1) {
  if (!delta.same_shape(eta) || !delta.same_shape(eta1) || delta.blocks() != sys.blocks() ||
      delta.block_dim() != sys.block_dim())
    throw std::invalid_argument("blended_sweep: dimension mismatch");

  const BlockVector g_delta = kron_apply(Matrix::identity(sys.blocks()), sys.g0, delta);

  // r1 = (I − step X⊗G0)Δ − η
  BlockVector r1 = delta;
  r1 -= sys.step * kron_scalar_apply(sys.x, g_delta);
  r1 -= eta;

  // r2 = ρ(X^{-1}⊗I − step I⊗G0)Δ − η1
  BlockVector r2 = kron_scalar_apply(sys.x_inv, delta);
  r2 -= sys.step * g_delta;
  r2 *= sys.rho;
  r2 -= eta1;

  // T = r2 + θ(r1 − r2)
  BlockVector t = r2 + ops.theta_apply(r1 - r2);
  return delta - ops.theta_apply(t);
}

BlockVector blended_sweep_from_zero(const BlendedOperators& ops, const BlockVector& eta,
                                    const BlockVector& eta1) {
  if (!eta.same_shape(eta1) || eta.block_dim() != ops.weight_factor.dim())
    throw std::invalid_argument("blended_sweep_from_zero: dimension mismatch");
  BlockVector delta = eta;
  delta -= eta1;
  for (std::size_t j = 0; j < delta.blocks(); ++j) ops.weight_factor.solve_in_place(delta.block(j));
  delta += eta1;
  for (std::size_t j = 0; j < delta.blocks(); ++j) ops.weight_factor.solve_in_place(delta.block(j));
  return delta;
}

StepStats solve_stage_system(const SolverConfig& cfg, const ResidualFunction& residual,
                             const LinearizedSystem* sys, BlockVector& gamma) {
  cfg.validate();
  StepStats stats;

  LUFactor newton;
  BlendedOperators blended;
  if (cfg.kind != SolverKind::fixed_point) {
    if (sys == nullptr) throw std::invalid_argument("solve_stage_system: missing linearization");
    if (cfg.kind == SolverKind::newton_direct) {
      newton = LUFactor(newton_matrix(*sys));
      stats.factorizations = 1;
      if (newton.singular()) {
        stats.status = StepStatus::singular_matrix;
        return stats;
      }
    } else {
      blended = blended_step_matrices(*sys);
      stats.factorizations = 1;
      if (blended.singular()) {
        stats.status = StepStatus::singular_matrix;
        return stats;
      }
    }
  }

  BlockVector f(gamma.blocks(), gamma.block_dim());
  double previous = std::numeric_limits<double>::infinity();
  int growth = 0;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    try {
      stats.gradient_evaluations += residual(gamma, f);
    } catch (const NonFiniteStage& e) {
      stats.status = StepStatus::non_finite;
      stats.failed_stage = e.stage();
      return stats;
    }
    stats.iterations = it;
    stats.residual_norm = f.norm_inf();

    BlockVector delta;
    switch (cfg.kind) {
      case SolverKind::fixed_point:
        delta = -1.0 * f;
        break;
      case SolverKind::newton_direct:
        delta = -1.0 * f;
        newton.solve_in_place(delta.data());
        break;
      case SolverKind::blended: {
        const BlockVector eta = -1.0 * f;
        delta = blended_sweep_from_zero(blended, eta, blended_rhs(*sys, eta));
        break;
      }
    }
    gamma += delta;

    const double dn = delta.norm_inf();
    stats.correction_norm = dn;
    if (!std::isfinite(dn) || !gamma.all_finite()) {
      stats.status = StepStatus::non_finite;
      return stats;
    }
    if (dn <= cfg.abs_tol + cfg.rel_tol * gamma.norm_inf()) {
      stats.status = StepStatus::converged;
      stats.converged = true;
      return stats;
    }
    growth = dn > previous ? growth + 1 : 0;
    if (growth >= cfg.divergence_window) {
      stats.status = StepStatus::diverged;
      return stats;
    }
    previous = dn;
  }
  stats.status = StepStatus::max_iterations;
  return stats;
}

}  // namespace hbvm
