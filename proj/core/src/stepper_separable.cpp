#include "hbvm/stepper_separable.hpp"

#include <stdexcept>
#include <utility>

namespace hbvm {

SeparableStepper::SeparableStepper(MethodTableau tableau, SeparableProblem problem,
                                   SolverConfig config)
    : tab_(std::move(tableau)), prob_(std::move(problem)), cfg_(config) {
  cfg_.validate();
  if (prob_.m == 0) throw std::invalid_argument("SeparableStepper: problem has no degrees of freedom");
  stage_buf_ = Matrix(tab_.k, prob_.m);
  grad_buf_ = Matrix(tab_.k, prob_.m);
}

void SeparableStepper::set_config(const SolverConfig& cfg) {
  cfg.validate();
  cfg_ = cfg;
}

Matrix SeparableStepper::stages(const BlockVector& gamma, std::span<const double> q0,
                                std::span<const double> p0, double h) const {
  const std::size_t m = prob_.m;
  Matrix q(tab_.k, m);
  for (int i = 0; i < tab_.k; ++i) {
    auto qi = q.row(i);
    const double hc = h * tab_.quad.nodes[i];
    for (std::size_t a = 0; a < m; ++a) qi[a] = q0[a] + hc * p0[a];
    for (int j = 0; j < tab_.s; ++j) {
      const double w = h * h * tab_.integrals_x(i, j);
      const auto gj = gamma.block(j);
      for (std::size_t a = 0; a < m; ++a) qi[a] += w * gj[a];
    }
  }
  return q;
}

long SeparableStepper::evaluate_residual(const BlockVector& gamma, std::span<const double> q0,
                                         std::span<const double> p0, double h,
                                         BlockVector& out) {
  const std::size_t m = prob_.m;
  if (gamma.blocks() != std::size_t(tab_.s) || gamma.block_dim() != m || q0.size() != m ||
      p0.size() != m)
    throw std::invalid_argument("SeparableStepper::residual_q: dimension mismatch");

  const double h2 = h * h;
  for (int i = 0; i < tab_.k; ++i) {
    auto qi = stage_buf_.row(i);
    const double hc = h * tab_.quad.nodes[i];
    for (std::size_t a = 0; a < m; ++a) qi[a] = q0[a] + hc * p0[a];
    for (int j = 0; j < tab_.s; ++j) {
      const double w = h2 * tab_.integrals_x(i, j);
      const auto gj = gamma.block(j);
      for (std::size_t a = 0; a < m; ++a) qi[a] += w * gj[a];
    }
    auto gi = grad_buf_.row(i);
    prob_.potential_gradient(qi, gi);
    if (!all_finite(gi)) throw NonFiniteStage(i);
  }

  for (int j = 0; j < tab_.s; ++j) {
    auto fj = out.block(j);
    const auto gj = gamma.block(j);
    std::copy(gj.begin(), gj.end(), fj.begin());
    for (int i = 0; i < tab_.k; ++i) {
      const double w = tab_.projection(j, i);
      const auto gi = grad_buf_.row(i);
      for (std::size_t a = 0; a < m; ++a) fj[a] -= w * gi[a];
    }
  }
  return tab_.k;
}

BlockVector SeparableStepper::residual_q(const BlockVector& gamma, std::span<const double> q0,
                                         std::span<const double> p0, double h) {
  BlockVector out(gamma.blocks(), gamma.block_dim());
  evaluate_residual(gamma, q0, p0, h, out);
  return out;
}

PhasePoint SeparableStepper::advance_qp(std::span<const double> q0, std::span<const double> p0,
                                        double h, const MethodTableau& tab,
                                        const Matrix& stage_gradients) {
  const std::size_t m = q0.size();
  if (stage_gradients.rows() != std::size_t(tab.k) || stage_gradients.cols() != m ||
      p0.size() != m)
    throw std::invalid_argument("advance_qp: dimension mismatch");

  PhasePoint out{Vector(m, 0.0), Vector(m, 0.0)};
  for (int i = 0; i < tab.k; ++i) {
    const auto gi = stage_gradients.row(i);
    const double wq = tab.weights_a[i];
    const double wp = tab.quad.weights[i];
    for (std::size_t a = 0; a < m; ++a) {
      out.q[a] += wq * gi[a];
      out.p[a] += wp * gi[a];
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    out.q[a] = q0[a] + h * p0[a] + h * h * out.q[a];
    out.p[a] = p0[a] + h * out.p[a];
  }
  return out;
}

LinearizedSystem SeparableStepper::linearize(std::span<const double> q0, double h) const {
  return LinearizedSystem{tab_.x_squared, tab_.x_inv_squared, h * h, tab_.rho * tab_.rho,
                          prob_.potential_hessian(q0)};
}

GammaSolution SeparableStepper::solve(std::span<const double> q0, std::span<const double> p0,
                                      double h, SolverKind kind) {
  if (!(h >= 0.0)) throw std::invalid_argument("SeparableStepper: step size must be non-negative");
  GammaSolution sol{BlockVector(tab_.s, prob_.m), {}};
  SolverConfig cfg = cfg_;
  cfg.kind = kind;
  const Vector q(q0.begin(), q0.end());
  const Vector p(p0.begin(), p0.end());
  ResidualFunction f = [this, &q, &p, h](const BlockVector& g, BlockVector& out) {
    return evaluate_residual(g, q, p, h, out);
  };
  if (kind == SolverKind::fixed_point) {
    sol.stats = solve_stage_system(cfg, f, nullptr, sol.gamma);
  } else {
    const LinearizedSystem sys = linearize(q0, h);
    sol.stats = solve_stage_system(cfg, f, &sys, sol.gamma);
  }
  return sol;
}

GammaSolution SeparableStepper::solve_fixed_point_q(std::span<const double> q0,
                                                    std::span<const double> p0, double h) {
  return solve(q0, p0, h, SolverKind::fixed_point);
}

GammaSolution SeparableStepper::solve_newton_direct_q(std::span<const double> q0,
                                                      std::span<const double> p0, double h) {
  return solve(q0, p0, h, SolverKind::newton_direct);
}

GammaSolution SeparableStepper::solve_blended_q(std::span<const double> q0,
                                                std::span<const double> p0, double h) {
  return solve(q0, p0, h, SolverKind::blended);
}

SeparableStepResult SeparableStepper::step(std::span<const double> q0, std::span<const double> p0,
                                           double h) {
  if (!(h > 0.0)) throw std::invalid_argument("SeparableStepper::step: h must be positive");
  const GammaSolution sol = solve(q0, p0, h, cfg_.kind);
  SeparableStepResult r;
  r.stats = sol.stats;
  if (sol.stats.converged)
    r.state = advance_qp(q0, p0, h, tab_, grad_buf_);
  else
    r.state = {Vector(q0.begin(), q0.end()), Vector(p0.begin(), p0.end())};
  return r;
}

}  // namespace hbvm
