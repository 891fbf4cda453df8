#include "hbvm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace hbvm {

double SeparableProblem::energy(std::span<const double> q, std::span<const double> p) const {
  double kinetic = 0.0;
  for (double pi : p) kinetic += pi * pi;
  return 0.5 * kinetic - potential(q);
}

double SeparableProblem::energy(std::span<const double> y) const {
  return energy(y.first(m), y.subspan(m, m));
}

void apply_j(std::span<const double> v, std::span<double> out) {
  const std::size_t m = v.size() / 2;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = v[m + i];
    out[m + i] = -v[i];
  }
}

Matrix j_matrix(std::size_t m) {
  Matrix j(2 * m, 2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    j(i, m + i) = 1.0;
    j(m + i, i) = -1.0;
  }
  return j;
}

SeparableProblem quintic_oscillator() {
  SeparableProblem p;
  p.name = "quintic";
  p.m = 1;
  p.potential = [](std::span<const double> q) {
    const double x = q[0];
    return 1e4 * x * x * (0.8 * x * x * x - 0.75 * x * x - (2.0 / 3.0) * x + 0.5);
  };
  p.potential_gradient = [](std::span<const double> q, std::span<double> g) {
    const double x = q[0];
    g[0] = 1e4 * x * (((4.0 * x - 3.0) * x - 2.0) * x + 1.0);
  };
  p.potential_hessian = [](std::span<const double> q) {
    const double x = q[0];
    Matrix h(1, 1);
    h(0, 0) = 1e4 * (((16.0 * x - 9.0) * x - 4.0) * x + 1.0);
    return h;
  };
  p.q0 = {0.0};
  p.p0 = {1.0};
  return p;
}

SeparableProblem pendulum(double q0, double p0) {
  SeparableProblem p;
  p.name = "pendulum";
  p.m = 1;
  p.potential = [](std::span<const double> q) { return std::cos(q[0]) - 1.0; };
  p.potential_gradient = [](std::span<const double> q, std::span<double> g) {
    g[0] = -std::sin(q[0]);
  };
  p.potential_hessian = [](std::span<const double> q) {
    Matrix h(1, 1);
    h(0, 0) = -std::cos(q[0]);
    return h;
  };
  p.q0 = {q0};
  p.p0 = {p0};
  return p;
}

SeparableProblem harmonic_oscillator() {
  SeparableProblem p;
  p.name = "harmonic";
  p.m = 1;
  p.potential = [](std::span<const double> q) { return -0.5 * q[0] * q[0]; };
  p.potential_gradient = [](std::span<const double> q, std::span<double> g) { g[0] = -q[0]; };
  p.potential_hessian = [](std::span<const double>) { return Matrix(1, 1, -1.0); };
  p.q0 = {1.0};
  p.p0 = {0.0};
  return p;
}

std::vector<std::string> builtin_problem_names() { return {"quintic", "pendulum", "harmonic"}; }

SeparableProblem separable_problem_by_name(const std::string& name) {
  if (name == "quintic") return quintic_oscillator();
  if (name == "pendulum") return pendulum();
  if (name == "harmonic") return harmonic_oscillator();
  throw std::invalid_argument("unknown problem '" + name + "' (expected quintic, pendulum or harmonic)");
}

HamiltonianProblem as_first_order(const SeparableProblem& sep) {
  HamiltonianProblem h;
  h.name = sep.name;
  h.m = sep.m;
  const std::size_t m = sep.m;
  h.hamiltonian = [sep](std::span<const double> y) { return sep.energy(y); };
  h.gradient = [grad_u = sep.potential_gradient, m](std::span<const double> y,
                                                   std::span<double> g) {
    grad_u(y.first(m), g.first(m));
    for (std::size_t i = 0; i < m; ++i) {
      g[i] = -g[i];
      g[m + i] = y[m + i];
    }
  };
  h.hessian = [hess_u = sep.potential_hessian, m](std::span<const double> y) {
    const Matrix hu = hess_u(y.first(m));
    Matrix out(2 * m, 2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) out(i, j) = -hu(i, j);
      out(m + i, m + i) = 1.0;
    }
    return out;
  };
  h.y0 = sep.q0;
  h.y0.insert(h.y0.end(), sep.p0.begin(), sep.p0.end());
  return h;
}

Matrix fd_hessian(const GradientField& gradient, std::span<const double> x, double fd_step) {
  const std::size_t n = x.size();
  Matrix h(n, n);
  Vector xp(x.begin(), x.end());
  Vector gp(n), gm(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double step = fd_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    gradient(xp, gp);
    xp[j] = x[j] - step;
    gradient(xp, gm);
    xp[j] = x[j];
    for (std::size_t i = 0; i < n; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
  }
  // symmetrize
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) h(i, j) = h(j, i) = 0.5 * (h(i, j) + h(j, i));
  return h;
}

HamiltonianProblem with_fd_hessian(HamiltonianProblem problem, double fd_step) {
  problem.hessian = [grad = problem.gradient, fd_step](std::span<const double> y) {
    return fd_hessian(grad, y, fd_step);
  };
  return problem;
}

SeparableProblem with_fd_hessian(SeparableProblem problem, double fd_step) {
  problem.potential_hessian = [grad = problem.potential_gradient, fd_step](std::span<const double> q) {
    return fd_hessian(grad, q, fd_step);
  };
  return problem;
}

namespace {

double deviation(double analytic, double approx) {
  return std::abs(analytic - approx) / std::max(1.0, std::abs(analytic));
}

DerivativeReport check_fields(const ScalarField& f, const GradientField& grad,
                              const HessianField& hess, std::size_t n,
                              std::span<const Vector> points, double fd_step, double tolerance) {
  if (!(fd_step > 0.0 && fd_step <= 1e-3))
    throw std::invalid_argument("check_derivatives: fd_step must lie in (0, 1e-3]");

  DerivativeReport report;
  report.tolerance = tolerance;
  Vector g(n), x(n);
  for (std::size_t pt = 0; pt < points.size(); ++pt) {
    const Vector& x0 = points[pt];
    if (x0.size() != n) throw std::invalid_argument("check_derivatives: point has wrong dimension");
    grad(x0, g);
    const Matrix h = hess(x0);
    const Matrix h_fd = fd_hessian(grad, x0, fd_step);
    bool finite = std::isfinite(f(x0)) && all_finite(g) && h.all_finite() && h_fd.all_finite();

    x = x0;
    for (std::size_t j = 0; j < n && finite; ++j) {
      const double step = fd_step * std::max(1.0, std::abs(x0[j]));
      x[j] = x0[j] + step;
      const double fp = f(x);
      x[j] = x0[j] - step;
      const double fm = f(x);
      x[j] = x0[j];
      const double fd = (fp - fm) / (2.0 * step);
      if (!std::isfinite(fd)) {
        finite = false;
        break;
      }
      report.max_gradient_deviation = std::max(report.max_gradient_deviation, deviation(g[j], fd));
    }
    if (!finite) {
      report.non_finite_points.push_back(pt);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        report.max_hessian_deviation =
            std::max(report.max_hessian_deviation, deviation(h(i, j), h_fd(i, j)));
        report.max_hessian_asymmetry =
            std::max(report.max_hessian_asymmetry, std::abs(h(i, j) - h(j, i)));
      }
  }
  report.passed = report.non_finite_points.empty() &&
                  report.max_gradient_deviation <= tolerance &&
                  report.max_hessian_deviation <= tolerance;
  return report;
}

}  // namespace

DerivativeReport check_derivatives(const HamiltonianProblem& problem,
                                   std::span<const Vector> points, double fd_step,
                                   double tolerance) {
  return check_fields(problem.hamiltonian, problem.gradient, problem.hessian, problem.dim(),
                      points, fd_step, tolerance);
}

DerivativeReport check_derivatives(const SeparableProblem& problem,
                                   std::span<const Vector> points, double fd_step,
                                   double tolerance) {
  return check_fields(problem.potential, problem.potential_gradient, problem.potential_hessian,
                      problem.m, points, fd_step, tolerance);
}

}  // namespace hbvm
