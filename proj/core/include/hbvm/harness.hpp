#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hbvm/dense.hpp"
#include "hbvm/iteration.hpp"
#include "hbvm/problems.hpp"

namespace hbvm {

enum class Formulation { first_order, second_order };

std::string_view to_string(Formulation f) noexcept;
/// "first" / "second"
Formulation parse_formulation(std::string_view name);

/// "GAUSS<s>" when k == s, otherwise "HBVM(k,s)".
std::string method_label(int k, int s);

struct RunSpec {
  std::string problem = "quintic";
  Formulation formulation = Formulation::second_order;
  int k = 8;
  int s = 2;
  double h = 1e-3;
  double t_end = 10.0;
  SolverConfig solver;
  /// Record every `thin`-th step (the final state is always recorded).
  std::size_t thin = 1;
  std::string out_path;
  std::string energy_out_path;

  void validate() const;
};

/// Sampled states (q, p stacked) with H(y_n) − H(y_0). step_stats has one
/// entry per attempted step, independent of thinning.
struct Trajectory {
  std::size_t m = 0;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> energy_error;
  std::vector<StepStats> step_stats;

  std::size_t samples() const noexcept { return times.size(); }
};

enum class RunStatus { completed, no_convergence };

struct RunReport {
  RunStatus status = RunStatus::completed;
  std::size_t steps = 0;
  /// Index of the step that failed (valid when status == no_convergence).
  std::size_t failed_step = 0;
  StepStatus failure = StepStatus::converged;
  long total_iterations = 0;
  long gradient_evaluations = 0;
  long factorizations = 0;
  double initial_energy = 0.0;
  double max_abs_energy_error = 0.0;
  double wall_seconds = 0.0;
  /// iterations-per-step -> number of steps
  std::map<int, long> iteration_histogram;

  bool converged() const noexcept { return status == RunStatus::completed; }
};

struct RunResult {
  Trajectory trajectory;
  RunReport report;
};

/// Fixed-step integration over [0, t_end]. The last step is clipped to land
/// on t_end. A step that fails to converge stops the run and marks the
/// report no_convergence; the trajectory up to that point is returned.
RunResult integrate(const RunSpec& spec);
RunResult integrate(const SeparableProblem& problem, const RunSpec& spec);
/// First-order formulation only.
RunResult integrate(const HamiltonianProblem& problem, const RunSpec& spec);

/// Number of steps used for [0, t_end] with step h.
std::size_t step_count(double t_end, double h);

struct Table1Cell {
  double h = 0.0;
  int k = 0;
  int s = 0;
  Formulation formulation = Formulation::second_order;
  SolverKind solver = SolverKind::blended;
  bool converged = false;
  long total_iterations = 0;
  double max_abs_energy_error = 0.0;
  double wall_seconds = 0.0;
};

struct Table1Options {
  std::string problem = "quintic";
  std::vector<double> h_values{1e-3, 5e-3, 1e-2};
  std::vector<std::pair<int, int>> methods{{2, 2}, {8, 2}};
  std::vector<Formulation> formulations{Formulation::second_order, Formulation::first_order};
  std::vector<SolverKind> solvers{SolverKind::blended, SolverKind::fixed_point};
  double t_end = 10.0;
  SolverConfig solver;
  /// Run cells on separate threads. Each cell is itself deterministic.
  bool parallel = true;
};

/// Cells ordered by h, then method, formulation, solver.
std::vector<Table1Cell> table1_experiment(const Table1Options& options);
/// Text grid of iteration totals, "--" for runs that did not converge.
std::string format_table1(const std::vector<Table1Cell>& cells);

struct OrderCheckOptions {
  std::string problem = "pendulum";
  int k = 6;
  int s = 2;
  double h0 = 0.2;
  int halvings = 4;
  double t_end = 10.0;
  SolverConfig solver;
};

struct OrderCheckResult {
  std::vector<double> h_values;
  /// errors[i] belongs to h_values[i]; one fewer entry for Richardson.
  std::vector<double> errors;
  /// Least-squares slope of log(error) against log(h).
  double slope = 0.0;
};

/// Observed order at t_end over h0, h0/2, .... For "harmonic" the errors are
/// against the exact flow; otherwise they are Richardson differences
/// ||y_h − y_{h/2}||_∞ between successive runs.
OrderCheckResult order_check(const OrderCheckOptions& options);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hbvm
