#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hbvm/iteration.hpp"
#include "hbvm/stepper_general.hpp"
#include "test_support.hpp"

namespace hbvm {
namespace {

using testing::naive_solve;

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

SolverConfig config(SolverKind kind, double rel_tol = 1e-12, double abs_tol = 1e-14) {
  SolverConfig c;
  c.kind = kind;
  c.rel_tol = rel_tol;
  c.abs_tol = abs_tol;
  return c;
}

TEST(Residual, ZeroFieldAtZeroGamma) {
  GeneralStepper st(build_tableau(4, 2), testing::zero_field());
  const BlockVector f = st.residual(BlockVector(2, 2), Vector{0.3, 0.4}, 0.1);
  EXPECT_EQ(f.norm_inf(), 0.0);
}

TEST(Residual, ZeroStepIsAffineWithIdentityPart) {
  const HamiltonianProblem prob = as_first_order(pendulum());
  GeneralStepper st(build_tableau(5, 3), prob);
  const Vector y0{0.7, -0.2};
  const BlockVector f0 = st.residual(BlockVector(3, 2), y0, 0.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  BlockVector g(3, 2);
  for (double& v : g.data()) v = dist(rng);
  const BlockVector fg = st.residual(g, y0, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(fg.data()[i] - f0.data()[i], g.data()[i], 1e-15);
}

TEST(Residual, LinearProblemMatchesDenseSolve) {
  // H = ½ yᵀy: F(γ) = γ − (P_sᵀΩ ⊗ J)(e ⊗ y0 + h (Iint ⊗ I) γ). Solve the
  // s·2m linear system densely and check F vanishes at its solution.
  const Matrix c = Matrix::identity(2);
  const HamiltonianProblem prob = testing::quadratic_problem(c);
  for (int s : {1, 2, 3}) {
    const MethodTableau t = build_tableau(s + 2, s);
    GeneralStepper st(t, prob, config(SolverKind::newton_direct));
    const Vector y0{0.8, -0.3};
    const double h = 0.3;
    const double jm[2][2] = {{0, 1}, {-1, 0}};
    const std::size_t n = 2 * s;
    testing::Dense a = testing::dense_zeros(n, n);
    std::vector<double> rhs(n, 0.0);
    for (int i = 0; i < s; ++i) {
      double pe = 0.0;
      for (int l = 0; l < t.k; ++l) pe += t.projection(i, l);
      for (int r = 0; r < 2; ++r) {
        a[2 * i + r][2 * i + r] += 1.0;
        rhs[2 * i + r] = pe * (jm[r][0] * y0[0] + jm[r][1] * y0[1]);
        for (int j = 0; j < s; ++j) {
          double pi = 0.0;
          for (int l = 0; l < t.k; ++l) pi += t.projection(i, l) * t.integrals(l, j);
          for (int col = 0; col < 2; ++col) a[2 * i + r][2 * j + col] -= h * pi * jm[r][col];
        }
      }
    }
    const auto exact = naive_solve(a, rhs);
    const BlockVector g(s, 2, Vector(exact.begin(), exact.end()));
    EXPECT_LE(st.residual(g, y0, h).norm_inf(), 1e-14);

    const GammaSolution sol = st.solve_newton_direct(y0, h);
    ASSERT_TRUE(sol.stats.converged);
    EXPECT_LE(max_abs_diff(sol.gamma.data(), exact), 1e-14);
  }
}

TEST(Residual, NonFiniteGradientNamesStage) {
  HamiltonianProblem prob = as_first_order(pendulum());
  const GradientField good = prob.gradient;
  prob.gradient = [good](std::span<const double> y, std::span<double> g) {
    good(y, g);
    if (y[0] > 1.05) g[0] = std::numeric_limits<double>::infinity();
  };
  GeneralStepper st(build_tableau(4, 2), prob, config(SolverKind::fixed_point));
  const Vector y0{1.1, 1.0};
  try {
    st.residual(BlockVector(2, 2), y0, 0.1);
    FAIL() << "expected NonFiniteStage";
  } catch (const NonFiniteStage& e) {
    EXPECT_GE(e.stage(), 0);
    EXPECT_LT(e.stage(), 4);
  }
  const StepResult r = st.step(y0, 0.1);
  EXPECT_FALSE(r.stats.converged);
  EXPECT_EQ(r.stats.status, StepStatus::non_finite);
  EXPECT_GE(r.stats.failed_stage, 0);
}

TEST(Advance, Examples) {
  const Vector y0{1.0, 2.0};
  EXPECT_EQ(GeneralStepper::advance(y0, 0.5, BlockVector(2, 2)), y0);
  BlockVector g(2, 2);
  g(0, 0) = 1.0;
  g(1, 1) = 9.0;
  EXPECT_EQ(GeneralStepper::advance(y0, 0.5, g), (Vector{1.5, 2.0}));
}

TEST(Step, HarmonicGauss2MatchesClassical) {
  GeneralStepper st(build_tableau(2, 2), as_first_order(harmonic_oscillator()),
                    config(SolverKind::newton_direct, 1e-15, 1e-16));
  Vector y{1.0, 0.0};
  const StepResult r = st.step(y, 0.1);
  ASSERT_TRUE(r.stats.converged);
  EXPECT_LE(max_abs_diff(r.y1, testing::gauss2_harmonic_step(y, 0.1)), 1e-13);

  // a few more steps for good measure
  for (int n = 0; n < 20; ++n) {
    const StepResult rn = st.step(y, 0.1);
    ASSERT_TRUE(rn.stats.converged);
    EXPECT_LE(max_abs_diff(rn.y1, testing::gauss2_harmonic_step(y, 0.1)), 1e-13);
    y = rn.y1;
  }
}

TEST(Step, PendulumGauss2MatchesClassical) {
  const HamiltonianProblem prob = as_first_order(pendulum());
  GeneralStepper st(build_tableau(2, 2), prob, config(SolverKind::blended, 1e-15, 1e-16));
  auto f = [&prob](std::span<const double> y, std::span<double> out) {
    Vector g(2);
    prob.gradient(y, g);
    apply_j(g, out);
  };
  const Vector y0{1.0, 0.0};
  const StepResult r = st.step(y0, 0.1);
  ASSERT_TRUE(r.stats.converged);
  EXPECT_LE(max_abs_diff(r.y1, testing::gauss2_step(f, y0, 0.1)), 1e-12);
}

TEST(Solvers, ZeroFieldConvergesImmediately) {
  GeneralStepper st(build_tableau(3, 2), testing::zero_field());
  const Vector y0{0.1, 0.2};
  for (SolverKind kind : {SolverKind::fixed_point, SolverKind::newton_direct, SolverKind::blended}) {
    const GammaSolution s = st.solve(y0, 0.1, kind);
    EXPECT_TRUE(s.stats.converged);
    EXPECT_EQ(s.stats.iterations, 1);
    EXPECT_EQ(s.gamma.norm_inf(), 0.0);
  }
}

TEST(Solvers, HarmonicFixedPointMatchesNewton) {
  GeneralStepper st(build_tableau(2, 2), as_first_order(harmonic_oscillator()));
  const Vector y0{1.0, 0.0};
  const GammaSolution a = st.solve_fixed_point(y0, 0.1);
  const GammaSolution b = st.solve_newton_direct(y0, 0.1);
  ASSERT_TRUE(a.stats.converged && b.stats.converged);
  EXPECT_LE(max_abs_diff(a.gamma.data(), b.gamma.data()), 1e-11);
}

TEST(Solvers, NewtonIsExactOnLinearProblems) {
  // Simplified Newton lands on the solution with the first correction; the
  // second residual evaluation confirms it.
  const Matrix c = Matrix::from_rows({{2.0, 0.5}, {0.5, 1.0}});
  GeneralStepper st(build_tableau(4, 2), testing::quadratic_problem(c));
  const Vector y0{0.4, -1.1};
  SolverConfig one = config(SolverKind::newton_direct);
  one.max_iter = 1;
  st.set_config(one);
  const GammaSolution first = st.solve(y0, 0.2, SolverKind::newton_direct);
  EXPECT_EQ(first.stats.iterations, 1);
  EXPECT_LE(st.residual(first.gamma, y0, 0.2).norm_inf(), 1e-14);

  st.set_config(config(SolverKind::newton_direct));
  const GammaSolution full = st.solve_newton_direct(y0, 0.2);
  EXPECT_TRUE(full.stats.converged);
  EXPECT_EQ(full.stats.iterations, 2);
  EXPECT_EQ(full.stats.factorizations, 1);
}

TEST(Solvers, QuinticNewtonMatchesBlended) {
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  GeneralStepper st(build_tableau(8, 2), prob);
  const GammaSolution n = st.solve_newton_direct(prob.y0, 1e-3);
  const GammaSolution b = st.solve_blended(prob.y0, 1e-3);
  ASSERT_TRUE(n.stats.converged && b.stats.converged);
  EXPECT_LE(max_abs_diff(n.gamma.data(), b.gamma.data()), 1e-10);
  EXPECT_EQ(b.stats.factorizations, 1);
}

TEST(Solvers, QuinticFixedPointFailsAtLargeStep) {
  // Following a converged blended trajectory, fixed-point iteration breaks
  // down somewhere on [0, 10] with h = 1e-2.
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  GeneralStepper st(build_tableau(8, 2), prob);
  Vector y = prob.y0;
  bool failed = false;
  for (int n = 0; n < 1000 && !failed; ++n) {
    const GammaSolution fp = st.solve_fixed_point(y, 1e-2);
    if (!fp.stats.converged) {
      failed = true;
      break;
    }
    const StepResult r = st.step(y, 1e-2);
    ASSERT_TRUE(r.stats.converged);
    y = r.y1;
  }
  EXPECT_TRUE(failed);
}

TEST(Solvers, QuinticConvergesAtSmallStep) {
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  GeneralStepper st(build_tableau(8, 2), prob, config(SolverKind::fixed_point));
  Vector y = prob.y0;
  for (int n = 0; n < 500; ++n) {
    const StepResult r = st.step(y, 1e-3);
    ASSERT_TRUE(r.stats.converged) << "step " << n;
    y = r.y1;
  }
}

TEST(Solvers, NewtonConvergesOnQuinticAtFiveMillis) {
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  GeneralStepper st(build_tableau(8, 2), prob, config(SolverKind::newton_direct));
  Vector y = prob.y0;
  for (int n = 0; n < 2000; ++n) {
    const StepResult r = st.step(y, 5e-3);
    ASSERT_TRUE(r.stats.converged) << "step " << n;
    y = r.y1;
  }
}

TEST(Solvers, ResidualBelowToleranceAtConvergence) {
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  GeneralStepper st(build_tableau(8, 2), prob);
  for (SolverKind kind : {SolverKind::fixed_point, SolverKind::newton_direct, SolverKind::blended}) {
    const GammaSolution s = st.solve(prob.y0, 1e-3, kind);
    ASSERT_TRUE(s.stats.converged);
    const double tol = st.config().abs_tol + st.config().rel_tol * s.gamma.norm_inf();
    EXPECT_LE(st.residual(s.gamma, prob.y0, 1e-3).norm_inf(), tol) << to_string(kind);
  }
}

TEST(Solvers, EquivalenceOnRandomProblems) {
  std::mt19937 rng(99);
  const double rel = 1e-12;
  for (int trial = 0; trial < 12; ++trial) {
    const HamiltonianProblem prob = testing::random_quartic(rng);
    const int s = 1 + trial % 3;
    const int k = std::min(8, s + trial % 6);
    GeneralStepper st(build_tableau(k, s), prob, config(SolverKind::blended, rel));
    const double h = 0.05;
    const GammaSolution sols[3] = {st.solve_fixed_point(prob.y0, h), st.solve_newton_direct(prob.y0, h),
                                   st.solve_blended(prob.y0, h)};
    for (int a = 0; a < 3; ++a) {
      ASSERT_TRUE(sols[a].stats.converged) << "trial " << trial << " solver " << a;
      for (int b = a + 1; b < 3; ++b) {
        const double scale = std::max(1.0, sols[a].gamma.norm_inf());
        EXPECT_LE(max_abs_diff(sols[a].gamma.data(), sols[b].gamma.data()), 10 * rel * scale)
            << "trial " << trial << " k=" << k << " s=" << s << " pair " << a << b;
      }
    }
  }
}

TEST(Energy, PolynomialHamiltonianIsConserved) {
  // ν = 4 is integrated exactly by the quadrature when k >= 2s.
  std::mt19937 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const HamiltonianProblem prob = testing::random_quartic(rng);
    const int s = 1 + trial % 3;
    const SolverConfig cfg = config(SolverKind::newton_direct, 1e-14, 1e-16);
    GeneralStepper st(build_tableau(2 * s, s), prob, cfg);
    Vector y = prob.y0;
    const double scale = std::max(1.0, std::abs(prob.hamiltonian(y)));
    const double eps = std::numeric_limits<double>::epsilon();
    for (int n = 0; n < 100; ++n) {
      const StepResult r = st.step(y, 0.1);
      ASSERT_TRUE(r.stats.converged);
      EXPECT_LE(std::abs(prob.hamiltonian(r.y1) - prob.hamiltonian(y)),
                100 * (cfg.rel_tol * scale + eps * scale));
      y = r.y1;
    }
  }
}

TEST(Energy, PendulumSingleStep) {
  const HamiltonianProblem prob = as_first_order(pendulum());
  GeneralStepper st(build_tableau(6, 2), prob, config(SolverKind::newton_direct, 1e-15, 1e-16));
  const StepResult r = st.step(prob.y0, 0.1);
  ASSERT_TRUE(r.stats.converged);
  const double h0 = prob.hamiltonian(prob.y0);
  EXPECT_LE(std::abs(prob.hamiltonian(r.y1) - h0) / h0, 1e-12);
}

TEST(Energy, PendulumTwoHundredSteps) {
  const HamiltonianProblem prob = as_first_order(pendulum());
  GeneralStepper st(build_tableau(6, 3), prob, config(SolverKind::blended, 1e-15, 1e-16));
  Vector y = prob.y0;
  const double h0 = prob.hamiltonian(y);
  for (int n = 0; n < 200; ++n) {
    const StepResult r = st.step(y, 0.05);
    ASSERT_TRUE(r.stats.converged);
    y = r.y1;
  }
  EXPECT_LE(std::abs(prob.hamiltonian(y) - h0) / h0, 1e-11);
}

TEST(Energy, QuinticFirstOrderAtRoundOff) {
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  for (double h : {1e-3, 5e-3}) {
    GeneralStepper st(build_tableau(8, 2), prob, config(SolverKind::blended, 1e-14, 1e-16));
    Vector y = prob.y0;
    const double h0 = prob.hamiltonian(y);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const StepResult r = st.step(y, h);
      ASSERT_TRUE(r.stats.converged) << "h=" << h << " step " << n;
      y = r.y1;
      worst = std::max(worst, std::abs(prob.hamiltonian(y) - h0));
    }
    EXPECT_LE(worst, 1e-10) << "h=" << h;
  }
}

// --- blended building blocks ---

LinearizedSystem scalar_system(int s, double step, const Matrix& g0) {
  const MethodTableau t = build_tableau(s, s);
  return LinearizedSystem{t.x, t.x_inv, step, t.rho, g0};
}

TEST(Blended, ThetaIsIdentityForZeroJacobian) {
  const LinearizedSystem sys = scalar_system(2, 0.1, Matrix(3, 3));
  const BlendedOperators ops = blended_step_matrices(sys);
  const BlockVector v(2, 3, Vector{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(ops.theta_apply(v), v);
}

TEST(Blended, ThetaScalar) {
  const double g = -3.0, h = 0.2;
  const LinearizedSystem sys = scalar_system(3, h, Matrix::from_rows({{g}}));
  const BlendedOperators ops = blended_step_matrices(sys);
  const BlockVector v(3, 1, Vector{1.0, -2.0, 0.5});
  const BlockVector out = ops.theta_apply(v);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out.data()[i], v.data()[i] / (1.0 - sys.rho * h * g), 1e-15);
}

TEST(Blended, ThetaRoundTrip) {
  std::mt19937 rng(8);
  Matrix g0(4, 4);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : g0.data()) v = dist(rng);
  const LinearizedSystem sys = scalar_system(2, 0.3, g0);
  const BlendedOperators ops = blended_step_matrices(sys);
  Matrix w = g0;
  w *= -sys.rho * sys.step;
  for (std::size_t i = 0; i < 4; ++i) w(i, i) += 1.0;
  BlockVector v(2, 4);
  for (double& x : v.data()) x = dist(rng);
  const BlockVector back = ops.theta_apply(kron_apply(Matrix::identity(2), w, v));
  EXPECT_LE(max_abs_diff(back.data(), v.data()), 1e-12);
}

TEST(Blended, RejectsNonPositiveRho) {
  LinearizedSystem sys = scalar_system(2, 0.1, Matrix(2, 2));
  sys.rho = 0.0;
  EXPECT_THROW(blended_step_matrices(sys), std::invalid_argument);
}

TEST(Blended, ZeroJacobianSweepReachesEta) {
  const LinearizedSystem sys = scalar_system(2, 0.1, Matrix(2, 2));
  const BlendedOperators ops = blended_step_matrices(sys);
  const BlockVector eta(2, 2, Vector{0.3, -0.1, 2.0, 1.0});
  const BlockVector next = blended_sweep(sys, ops, BlockVector(2, 2), eta, blended_rhs(sys, eta));
  EXPECT_LE(max_abs_diff(next.data(), eta.data()), 1e-15);
}

TEST(Blended, ZeroStartSweepMatchesGeneralSweep) {
  std::mt19937 rng(13);
  const HamiltonianProblem prob = testing::random_quartic(rng);
  const Matrix g0 = j_matrix(2) * prob.hessian(prob.y0);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int s : {1, 2, 3, 5}) {
    const LinearizedSystem sys = scalar_system(s, 0.15, g0);
    const BlendedOperators ops = blended_step_matrices(sys);
    BlockVector eta(s, 4);
    for (double& v : eta.data()) v = dist(rng);
    const BlockVector eta1 = blended_rhs(sys, eta);
    const BlockVector a = blended_sweep(sys, ops, BlockVector(s, 4), eta, eta1);
    const BlockVector b = blended_sweep_from_zero(ops, eta, eta1);
    EXPECT_LE(max_abs_diff(a.data(), b.data()), 1e-15 * std::max(1.0, a.norm_inf()));
  }
}

TEST(Blended, ExactSolutionIsFixedPoint) {
  std::mt19937 rng(21);
  const HamiltonianProblem prob = testing::random_quartic(rng);
  const Matrix g0 = j_matrix(2) * prob.hessian(prob.y0);
  for (int s : {1, 2, 3}) {
    const LinearizedSystem sys = scalar_system(s, 0.2, g0);
    const BlendedOperators ops = blended_step_matrices(sys);
    BlockVector eta(s, 4);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : eta.data()) v = dist(rng);
    const Matrix m = newton_matrix(sys);
    testing::Dense md = testing::dense_zeros(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) md[i][j] = m(i, j);
    const auto star = naive_solve(md, eta.values());
    const BlockVector delta(s, 4, Vector(star.begin(), star.end()));
    const BlockVector next = blended_sweep(sys, ops, delta, eta, blended_rhs(sys, eta));
    EXPECT_LE(max_abs_diff(next.data(), delta.data()), 1e-13);
  }
}

double sweep_to_convergence(double h_lambda, int sweeps, double* contraction) {
  // y' = λy written as a 2x2 block with G0 = λ I, h = 1.
  const Matrix g0 = Matrix::from_rows({{h_lambda, 0.0}, {0.0, h_lambda}});
  const LinearizedSystem sys = scalar_system(2, 1.0, g0);
  const BlendedOperators ops = blended_step_matrices(sys);
  const BlockVector eta(2, 2, Vector{1.0, -0.5, 0.25, 2.0});
  const Matrix m = newton_matrix(sys);
  testing::Dense md = testing::dense_zeros(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) md[i][j] = m(i, j);
  const auto exact = naive_solve(md, eta.values());
  const BlockVector eta1 = blended_rhs(sys, eta);
  BlockVector delta(2, 2);
  double prev = max_abs_diff(delta.data(), exact);
  double worst_ratio = 0.0;
  for (int n = 0; n < sweeps; ++n) {
    delta = blended_sweep(sys, ops, delta, eta, eta1);
    const double err = max_abs_diff(delta.data(), exact);
    if (prev > 1e-14) worst_ratio = std::max(worst_ratio, err / prev);
    prev = err;
  }
  if (contraction) *contraction = worst_ratio;
  return prev;
}

TEST(Blended, ScalarTestEquationConverges) {
  for (double hl : {-1.0, -10.0}) {
    double ratio = 0.0;
    EXPECT_LE(sweep_to_convergence(hl, 200, &ratio), 1e-12) << "hλ=" << hl;
    EXPECT_LT(ratio, 1.0) << "hλ=" << hl;
  }
}

TEST(Blended, ContractionVanishesForStiffLimit) {
  double ratio = 0.0;
  sweep_to_convergence(-1e8, 3, &ratio);
  EXPECT_LT(ratio, 1e-3);
}

TEST(Blended, SweepRejectsMismatch) {
  const LinearizedSystem sys = scalar_system(2, 0.1, Matrix(2, 2));
  const BlendedOperators ops = blended_step_matrices(sys);
  const BlockVector good(2, 2), bad(3, 2);
  EXPECT_THROW(blended_sweep(sys, ops, bad, bad, bad), std::invalid_argument);
  EXPECT_THROW(blended_sweep(sys, ops, good, bad, good), std::invalid_argument);
}

TEST(Config, Validation) {
  SolverConfig c;
  c.rel_tol = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.max_iter = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_solver_kind("newton"), SolverKind::newton_direct);
  EXPECT_EQ(parse_solver_kind("fixed-point"), SolverKind::fixed_point);
  EXPECT_THROW(parse_solver_kind("gmres"), std::invalid_argument);
}

TEST(Config, DivergenceIsReported) {
  // Fixed-point on a stiff linear problem: the correction grows every sweep.
  const Matrix c = Matrix::from_rows({{400.0, 0.0}, {0.0, 400.0}});
  GeneralStepper st(build_tableau(2, 2), testing::quadratic_problem(c), config(SolverKind::fixed_point));
  const StepResult r = st.step(Vector{1.0, 0.0}, 0.1);
  EXPECT_FALSE(r.stats.converged);
  EXPECT_EQ(r.stats.status, StepStatus::diverged);
  EXPECT_EQ(r.y1, (Vector{1.0, 0.0}));
  EXPECT_LE(r.stats.iterations, 10);
}

}  // namespace
}  // namespace hbvm
