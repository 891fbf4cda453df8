#include "hbvm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "hbvm/csv.hpp"
#include "hbvm/stepper_general.hpp"
#include "hbvm/stepper_separable.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

std::string_view to_string(Formulation f) noexcept {
  return f == Formulation::first_order ? "first" : "second";
}

Formulation parse_formulation(std::string_view name) {
  if (name == "first") return Formulation::first_order;
  if (name == "second") return Formulation::second_order;
  throw std::invalid_argument("unknown formulation '" + std::string(name) +
                              "' (expected first or second)");
}

std::string method_label(int k, int s) {
  if (k == s) return "GAUSS" + std::to_string(s);
  return "HBVM(" + std::to_string(k) + "," + std::to_string(s) + ")";
}

void RunSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("RunSpec: h must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("RunSpec: t_end must be non-negative");
  if (s < 1 || k < s) throw std::invalid_argument("RunSpec: need 1 <= s <= k");
  if (thin < 1) throw std::invalid_argument("RunSpec: thin must be >= 1");
  solver.validate();
}

std::size_t step_count(double t_end, double h) {
  if (t_end <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
}

namespace {

using StepFunction = std::function<StepStats(const Vector& y, double h, Vector& y_next)>;
using EnergyFunction = std::function<double(const Vector& y)>;

RunResult drive(const RunSpec& spec, std::size_t m, const Vector& y0, const StepFunction& step,
                const EnergyFunction& energy) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  Trajectory& traj = result.trajectory;
  RunReport& report = result.report;
  traj.m = m;

  const double h0 = energy(y0);
  report.initial_energy = h0;

  auto record = [&](double t, const Vector& y, double err) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.energy_error.push_back(err);
  };
  record(0.0, y0, 0.0);

  const std::size_t n_steps = step_count(spec.t_end, spec.h);
  Vector y = y0;
  Vector y_next(y0.size());
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t0 = static_cast<double>(n) * spec.h;
    const bool last = (n + 1 == n_steps);
    const double t1 = last ? spec.t_end : static_cast<double>(n + 1) * spec.h;
    const double h = t1 - t0;

    const StepStats stats = step(y, h, y_next);
    traj.step_stats.push_back(stats);
    report.total_iterations += stats.iterations;
    report.gradient_evaluations += stats.gradient_evaluations;
    report.factorizations += stats.factorizations;
    ++report.iteration_histogram[stats.iterations];

    if (!stats.converged) {
      report.status = RunStatus::no_convergence;
      report.failed_step = n;
      report.failure = stats.status;
      if (traj.times.back() != t0) record(t0, y, energy(y) - h0);
      break;
    }
    y.swap(y_next);
    ++report.steps;
    const double err = energy(y) - h0;
    report.max_abs_energy_error = std::max(report.max_abs_energy_error, std::abs(err));
    if ((n + 1) % spec.thin == 0 || last) record(t1, y, err);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!spec.out_path.empty()) emit_csv(traj, spec.out_path);
  if (!spec.energy_out_path.empty()) emit_energy_csv(traj, spec.energy_out_path);
  return result;
}

}  // namespace

RunResult integrate(const HamiltonianProblem& problem, const RunSpec& spec) {
  spec.validate();
  if (spec.formulation != Formulation::first_order)
    throw std::invalid_argument("integrate: second-order formulation needs a separable problem");
  if (problem.y0.size() != problem.dim())
    throw std::invalid_argument("integrate: initial state has wrong dimension");

  GeneralStepper stepper(build_tableau(spec.k, spec.s), problem, spec.solver);
  StepFunction step = [&stepper](const Vector& y, double h, Vector& y_next) {
    StepResult r = stepper.step(y, h);
    y_next = std::move(r.y1);
    return r.stats;
  };
  EnergyFunction energy = [&problem](const Vector& y) { return problem.hamiltonian(y); };
  return drive(spec, problem.m, problem.y0, step, energy);
}

RunResult integrate(const SeparableProblem& problem, const RunSpec& spec) {
  spec.validate();
  if (spec.formulation == Formulation::first_order) return integrate(as_first_order(problem), spec);
  if (problem.q0.size() != problem.m || problem.p0.size() != problem.m)
    throw std::invalid_argument("integrate: initial state has wrong dimension");

  const std::size_t m = problem.m;
  SeparableStepper stepper(build_tableau(spec.k, spec.s), problem, spec.solver);
  StepFunction step = [&stepper, m](const Vector& y, double h, Vector& y_next) {
    const std::span<const double> ys(y);
    SeparableStepResult r = stepper.step(ys.first(m), ys.subspan(m, m), h);
    y_next.assign(r.state.q.begin(), r.state.q.end());
    y_next.insert(y_next.end(), r.state.p.begin(), r.state.p.end());
    return r.stats;
  };
  EnergyFunction energy = [&problem](const Vector& y) { return problem.energy(y); };
  Vector y0 = problem.q0;
  y0.insert(y0.end(), problem.p0.begin(), problem.p0.end());
  return drive(spec, m, y0, step, energy);
}

RunResult integrate(const RunSpec& spec) {
  spec.validate();
  return integrate(separable_problem_by_name(spec.problem), spec);
}

std::vector<Table1Cell> table1_experiment(const Table1Options& options) {
  const SeparableProblem problem = separable_problem_by_name(options.problem);

  std::vector<Table1Cell> cells;
  for (double h : options.h_values)
    for (const auto& [k, s] : options.methods)
      for (Formulation f : options.formulations)
        for (SolverKind kind : options.solvers) {
          Table1Cell c;
          c.h = h;
          c.k = k;
          c.s = s;
          c.formulation = f;
          c.solver = kind;
          cells.push_back(c);
        }

  auto run_cell = [&problem, &options](Table1Cell cell) {
    RunSpec spec;
    spec.problem = options.problem;
    spec.formulation = cell.formulation;
    spec.k = cell.k;
    spec.s = cell.s;
    spec.h = cell.h;
    spec.t_end = options.t_end;
    spec.solver = options.solver;
    spec.solver.kind = cell.solver;
    spec.thin = std::max<std::size_t>(1, step_count(spec.t_end, spec.h));
    const RunResult r = integrate(problem, spec);
    cell.converged = r.report.converged();
    cell.total_iterations = r.report.total_iterations;
    cell.max_abs_energy_error = r.report.max_abs_energy_error;
    cell.wall_seconds = r.report.wall_seconds;
    return cell;
  };

  if (options.parallel) {
    std::vector<std::future<Table1Cell>> futures;
    futures.reserve(cells.size());
    for (const auto& c : cells) futures.push_back(std::async(std::launch::async, run_cell, c));
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = futures[i].get();
  } else {
    for (auto& c : cells) c = run_cell(c);
  }
  return cells;
}

std::string format_table1(const std::vector<Table1Cell>& cells) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "h" << std::setw(12) << "method" << std::setw(8) << "form"
     << std::setw(13) << "solver" << std::right << std::setw(12) << "iterations" << std::setw(14)
     << "max|dH|" << '\n';
  for (const auto& c : cells) {
    std::ostringstream h;
    h << c.h;
    os << std::left << std::setw(10) << h.str() << std::setw(12) << method_label(c.k, c.s)
       << std::setw(8) << to_string(c.formulation) << std::setw(13) << to_string(c.solver)
       << std::right << std::setw(12);
    if (c.converged) {
      os << c.total_iterations;
      std::ostringstream e;
      e << std::scientific << std::setprecision(2) << c.max_abs_energy_error;
      os << std::setw(14) << e.str();
    } else {
      os << "--" << std::setw(14) << "--";
    }
    os << '\n';
  }
  return os.str();
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares_slope: need at least two matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

OrderCheckResult order_check(const OrderCheckOptions& options) {
  if (options.halvings < 1) throw std::invalid_argument("order_check: need at least one halving");
  const SeparableProblem problem = separable_problem_by_name(options.problem);
  const std::size_t m = problem.m;

  RunSpec spec;
  spec.problem = options.problem;
  spec.formulation = Formulation::first_order;
  spec.k = options.k;
  spec.s = options.s;
  spec.t_end = options.t_end;
  spec.solver = options.solver;

  auto final_state = [&problem](const RunSpec& rs) {
    RunSpec local = rs;
    local.thin = std::max<std::size_t>(1, step_count(rs.t_end, rs.h));
    const RunResult r = integrate(problem, local);
    if (!r.report.converged())
      throw std::runtime_error("order_check: integration failed at h = " + std::to_string(rs.h));
    return r.trajectory.states.back();
  };

  OrderCheckResult result;
  double h = options.h0;
  std::vector<Vector> finals;
  for (int i = 0; i <= options.halvings; ++i, h *= 0.5) {
    spec.h = h;
    result.h_values.push_back(h);
    finals.push_back(final_state(spec));
  }

  auto max_diff = [](const Vector& a, const Vector& b) {
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    return err;
  };

  std::vector<double> log_h, log_e;
  if (options.problem == "harmonic") {
    const double t = options.t_end;
    Vector exact(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      exact[i] = problem.q0[i] * std::cos(t) + problem.p0[i] * std::sin(t);
      exact[m + i] = -problem.q0[i] * std::sin(t) + problem.p0[i] * std::cos(t);
    }
    for (std::size_t i = 0; i < finals.size(); ++i) {
      result.errors.push_back(max_diff(finals[i], exact));
      log_h.push_back(std::log(result.h_values[i]));
    }
  } else {
    // Richardson: y_h − y_{h/2} = C h^p (1 − 2^{−p}) + ..., same slope as the error.
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
      result.errors.push_back(max_diff(finals[i], finals[i + 1]));
      log_h.push_back(std::log(result.h_values[i]));
    }
  }
  for (double e : result.errors) log_e.push_back(std::log(e));
  result.slope = least_squares_slope(log_h, log_e);
  return result;
}

}  // namespace hbvm
