// Command-line driver: integrate, table1, rho-table, order-check.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 non-convergence.

#include <cstdio>
#include <exception>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hbvm/csv.hpp"
#include "hbvm/harness.hpp"
#include "hbvm/tableau.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;

struct CommonOptions {
  std::string problem = "quintic";
  std::string formulation = "second";
  int k = 8;
  int s = 2;
  double h = 1e-3;
  double t_end = 10.0;
  std::string solver = "blended";
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int max_iter = 100;
};

void add_tolerance_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--rel-tol", o.rel_tol, "relative stopping tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--abs-tol", o.abs_tol, "absolute stopping tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "iteration cap per step")->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--solver", o.solver, "fixed-point | newton | blended")
      ->check(CLI::IsMember({"fixed-point", "newton", "blended"}));
  add_tolerance_flags(cmd, o);
}

hbvm::SolverConfig solver_config(const CommonOptions& o) {
  hbvm::SolverConfig cfg;
  cfg.kind = hbvm::parse_solver_kind(o.solver);
  cfg.rel_tol = o.rel_tol;
  cfg.abs_tol = o.abs_tol;
  cfg.max_iter = o.max_iter;
  return cfg;
}

int run_integrate(const CommonOptions& o, const std::string& out, const std::string& energy_out,
                  std::size_t thin) {
  hbvm::RunSpec spec;
  spec.problem = o.problem;
  spec.formulation = hbvm::parse_formulation(o.formulation);
  spec.k = o.k;
  spec.s = o.s;
  spec.h = o.h;
  spec.t_end = o.t_end;
  spec.solver = solver_config(o);
  spec.thin = thin;
  spec.out_path = out;
  spec.energy_out_path = energy_out;

  const hbvm::RunResult r = hbvm::integrate(spec);
  const auto& rep = r.report;
  std::cout << "problem      " << spec.problem << '\n'
            << "method       " << hbvm::method_label(spec.k, spec.s) << " (" << o.formulation
            << " order, " << o.solver << ")\n"
            << "h            " << spec.h << "  t_end " << spec.t_end << '\n'
            << "steps        " << rep.steps << '\n'
            << "iterations   " << rep.total_iterations << '\n'
            << "grad evals   " << rep.gradient_evaluations << '\n'
            << "max |dH|     " << std::scientific << std::setprecision(3)
            << rep.max_abs_energy_error << std::defaultfloat << '\n'
            << "wall time    " << std::fixed << std::setprecision(3) << rep.wall_seconds << " s"
            << std::defaultfloat << '\n';
  if (!rep.converged()) {
    std::cout << "status       no convergence at step " << rep.failed_step << " ("
              << hbvm::to_string(rep.failure) << ")\n";
    return kExitNoConvergence;
  }
  std::cout << "status       completed\n";
  return kExitOk;
}

int run_table1(const CommonOptions& o, const std::vector<double>& hs, bool serial) {
  hbvm::Table1Options opt;
  opt.problem = o.problem;
  opt.t_end = o.t_end;
  if (!hs.empty()) opt.h_values = hs;
  opt.solver = solver_config(o);
  opt.parallel = !serial;
  const auto cells = hbvm::table1_experiment(opt);
  std::cout << hbvm::format_table1(cells);
  return kExitOk;
}

int run_rho_table(int s_max) {
  std::cout << "s   rho_s\n";
  for (int s = 1; s <= s_max; ++s)
    std::cout << std::left << std::setw(4) << s << std::fixed << std::setprecision(10)
              << hbvm::rho_opt(s) << '\n';
  return kExitOk;
}

int run_order_check(const CommonOptions& o, double h0, int halvings) {
  hbvm::OrderCheckOptions opt;
  opt.problem = o.problem;
  opt.k = o.k;
  opt.s = o.s;
  opt.h0 = h0;
  opt.halvings = halvings;
  opt.t_end = o.t_end;
  opt.solver = solver_config(o);
  const auto r = hbvm::order_check(opt);
  std::cout << "h              error\n";
  for (std::size_t i = 0; i < r.errors.size(); ++i)
    std::cout << std::left << std::setw(15) << r.h_values[i] << std::scientific
              << std::setprecision(6) << r.errors[i] << std::defaultfloat << '\n';
  std::cout << "observed order " << std::fixed << std::setprecision(3) << r.slope << " (expected "
            << 2 * o.s << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-conserving HBVM(k,s) integrators for Hamiltonian systems"};
  // "--h" is the step size, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  CommonOptions integ;
  std::string out, energy_out;
  std::size_t thin = 1;
  auto* cmd_integrate = app.add_subcommand("integrate", "fixed-step integration with CSV output");
  cmd_integrate->add_option("--problem", integ.problem)
      ->check(CLI::IsMember({"quintic", "pendulum", "harmonic"}));
  cmd_integrate->add_option("--formulation", integ.formulation)
      ->check(CLI::IsMember({"first", "second"}));
  cmd_integrate->add_option("--k", integ.k, "quadrature nodes")->check(CLI::Range(1, 64));
  cmd_integrate->add_option("--s", integ.s, "polynomial degree")->check(CLI::Range(1, 10));
  cmd_integrate->add_option("--h", integ.h, "step size")->check(CLI::PositiveNumber);
  cmd_integrate->add_option("--t-end", integ.t_end, "final time")->check(CLI::NonNegativeNumber);
  add_solver_flags(cmd_integrate, integ);
  cmd_integrate->add_option("--out", out, "phase CSV (t,q...,p...)");
  cmd_integrate->add_option("--energy-out", energy_out, "energy CSV (t,H_error)");
  cmd_integrate->add_option("--thin", thin, "record every Nth step")->check(CLI::PositiveNumber);

  // the solver kind is set per cell
  CommonOptions table;
  std::vector<double> table_h;
  bool serial = false;
  auto* cmd_table = app.add_subcommand("table1", "iteration totals for GAUSS2 and HBVM(8,2)");
  cmd_table->add_option("--problem", table.problem)
      ->check(CLI::IsMember({"quintic", "pendulum", "harmonic"}));
  cmd_table->add_option("--t-end", table.t_end)->check(CLI::PositiveNumber);
  cmd_table->add_option("--h", table_h, "step sizes (repeatable)")->check(CLI::PositiveNumber);
  add_tolerance_flags(cmd_table, table);
  cmd_table->add_flag("--serial", serial, "run cells one after another");

  int s_max = 10;
  auto* cmd_rho = app.add_subcommand("rho-table", "blending parameter rho_s = min|eig(X_s)|");
  cmd_rho->add_option("--s-max", s_max)->check(CLI::Range(1, 10));

  CommonOptions order;
  order.problem = "pendulum";
  order.k = 6;
  order.s = 2;
  order.solver = "newton";
  order.rel_tol = 1e-14;
  order.abs_tol = 1e-16;
  double h0 = 0.2;
  int halvings = 4;
  auto* cmd_order = app.add_subcommand("order-check", "observed convergence order");
  cmd_order->add_option("--problem", order.problem)
      ->check(CLI::IsMember({"quintic", "pendulum", "harmonic"}));
  cmd_order->add_option("--k", order.k)->check(CLI::Range(1, 64));
  cmd_order->add_option("--s", order.s)->check(CLI::Range(1, 10));
  cmd_order->add_option("--h", h0, "largest step size")->check(CLI::PositiveNumber);
  cmd_order->add_option("--halvings", halvings)->check(CLI::Range(1, 12));
  cmd_order->add_option("--t-end", order.t_end)->check(CLI::PositiveNumber);
  add_solver_flags(cmd_order, order);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_integrate) return run_integrate(integ, out, energy_out, thin);
    if (*cmd_table) return run_table1(table, table_h, serial);
    if (*cmd_rho) return run_rho_table(s_max);
    if (*cmd_order) return run_order_check(order, h0, halvings);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
