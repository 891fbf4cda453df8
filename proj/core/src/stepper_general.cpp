#include "hbvm/stepper_general.hpp"

#include <stdexcept>
#include <utility>

namespace hbvm {

GeneralStepper::GeneralStepper(MethodTableau tableau, HamiltonianProblem problem,
                               SolverConfig config)
    : tab_(std::move(tableau)), prob_(std::move(problem)), cfg_(config) {
  cfg_.validate();
  if (prob_.m == 0) throw std::invalid_argument("GeneralStepper: problem has no degrees of freedom");
  stage_buf_ = Matrix(tab_.k, prob_.dim());
  grad_buf_ = Matrix(tab_.k, prob_.dim());
}

void GeneralStepper::set_config(const SolverConfig& cfg) {
  cfg.validate();
  cfg_ = cfg;
}

Matrix GeneralStepper::stages(const BlockVector& gamma, std::span<const double> y0,
                              double h) const {
  const std::size_t d = prob_.dim();
  Matrix y(tab_.k, d);
  for (int i = 0; i < tab_.k; ++i) {
    auto yi = y.row(i);
    std::copy(y0.begin(), y0.end(), yi.begin());
    for (int j = 0; j < tab_.s; ++j) {
      const double w = h * tab_.integrals(i, j);
      const auto gj = gamma.block(j);
      for (std::size_t a = 0; a < d; ++a) yi[a] += w * gj[a];
    }
  }
  return y;
}

long GeneralStepper::evaluate_residual(const BlockVector& gamma, std::span<const double> y0,
                                       double h, BlockVector& out) {
  const std::size_t d = prob_.dim();
  if (gamma.blocks() != std::size_t(tab_.s) || gamma.block_dim() != d || y0.size() != d)
    throw std::invalid_argument("GeneralStepper::residual: dimension mismatch");

  for (int i = 0; i < tab_.k; ++i) {
    auto yi = stage_buf_.row(i);
    std::copy(y0.begin(), y0.end(), yi.begin());
    for (int j = 0; j < tab_.s; ++j) {
      const double w = h * tab_.integrals(i, j);
      const auto gj = gamma.block(j);
      for (std::size_t a = 0; a < d; ++a) yi[a] += w * gj[a];
    }
    auto gi = grad_buf_.row(i);
    prob_.gradient(yi, gi);
    if (!all_finite(gi)) throw NonFiniteStage(i);
  }

  Vector proj(d);
  for (int j = 0; j < tab_.s; ++j) {
    std::fill(proj.begin(), proj.end(), 0.0);
    for (int i = 0; i < tab_.k; ++i) {
      const double w = tab_.projection(j, i);
      const auto gi = grad_buf_.row(i);
      for (std::size_t a = 0; a < d; ++a) proj[a] += w * gi[a];
    }
    auto fj = out.block(j);
    apply_j(proj, fj);
    const auto gj = gamma.block(j);
    for (std::size_t a = 0; a < d; ++a) fj[a] = gj[a] - fj[a];
  }
  return tab_.k;
}

BlockVector GeneralStepper::residual(const BlockVector& gamma, std::span<const double> y0,
                                     double h) {
  BlockVector out(gamma.blocks(), gamma.block_dim());
  evaluate_residual(gamma, y0, h, out);
  return out;
}

Vector GeneralStepper::advance(std::span<const double> y0, double h, const BlockVector& gamma) {
  Vector y1(y0.begin(), y0.end());
  const auto g0 = gamma.block(0);
  for (std::size_t a = 0; a < y1.size(); ++a) y1[a] += h * g0[a];
  return y1;
}

LinearizedSystem GeneralStepper::linearize(std::span<const double> y0, double h) const {
  const Matrix hess = prob_.hessian(y0);
  return LinearizedSystem{tab_.x, tab_.x_inv, h, tab_.rho, j_matrix(prob_.m) * hess};
}

GammaSolution GeneralStepper::solve(std::span<const double> y0, double h, SolverKind kind) {
  if (!(h >= 0.0)) throw std::invalid_argument("GeneralStepper: step size must be non-negative");
  GammaSolution sol{BlockVector(tab_.s, prob_.dim()), {}};
  SolverConfig cfg = cfg_;
  cfg.kind = kind;
  const Vector y(y0.begin(), y0.end());
  ResidualFunction f = [this, &y, h](const BlockVector& g, BlockVector& out) {
    return evaluate_residual(g, y, h, out);
  };
  if (kind == SolverKind::fixed_point) {
    sol.stats = solve_stage_system(cfg, f, nullptr, sol.gamma);
  } else {
    const LinearizedSystem sys = linearize(y0, h);
    sol.stats = solve_stage_system(cfg, f, &sys, sol.gamma);
  }
  return sol;
}

GammaSolution GeneralStepper::solve_fixed_point(std::span<const double> y0, double h) {
  return solve(y0, h, SolverKind::fixed_point);
}

GammaSolution GeneralStepper::solve_newton_direct(std::span<const double> y0, double h) {
  return solve(y0, h, SolverKind::newton_direct);
}

GammaSolution GeneralStepper::solve_blended(std::span<const double> y0, double h) {
  return solve(y0, h, SolverKind::blended);
}

StepResult GeneralStepper::step(std::span<const double> y0, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("GeneralStepper::step: h must be positive");
  GammaSolution sol = solve(y0, h, cfg_.kind);
  StepResult r;
  r.stats = sol.stats;
  r.y1 = sol.stats.converged ? advance(y0, h, sol.gamma) : Vector(y0.begin(), y0.end());
  return r;
}

}  // namespace hbvm
