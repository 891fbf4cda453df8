#include <random>

#include <benchmark/benchmark.h>

#include "hbvm/dense.hpp"
#include "hbvm/harness.hpp"
#include "hbvm/stepper_general.hpp"
#include "hbvm/stepper_separable.hpp"
#include "hbvm/tableau.hpp"

namespace {

using namespace hbvm;

// args: solver kind, k
void BM_QuinticStepFirstOrder(benchmark::State& state) {
  const auto kind = static_cast<SolverKind>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const HamiltonianProblem prob = as_first_order(quintic_oscillator());
  SolverConfig cfg;
  cfg.kind = kind;
  GeneralStepper st(build_tableau(k, 2), prob, cfg);
  long iterations = 0;
  for (auto _ : state) {
    StepResult r = st.step(prob.y0, 1e-3);
    iterations += r.stats.iterations;
    benchmark::DoNotOptimize(r.y1.data());
  }
  state.counters["sweeps/step"] = benchmark::Counter(double(iterations) / double(state.iterations()));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_QuinticStepFirstOrder)
    ->ArgsProduct({{int(SolverKind::fixed_point), int(SolverKind::newton_direct), int(SolverKind::blended)},
                   {2, 8}});

void BM_QuinticStepSecondOrder(benchmark::State& state) {
  const auto kind = static_cast<SolverKind>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const SeparableProblem prob = quintic_oscillator();
  SolverConfig cfg;
  cfg.kind = kind;
  SeparableStepper st(build_tableau(k, 2), prob, cfg);
  long iterations = 0;
  for (auto _ : state) {
    SeparableStepResult r = st.step(prob.q0, prob.p0, 1e-3);
    iterations += r.stats.iterations;
    benchmark::DoNotOptimize(r.state.q.data());
  }
  state.counters["sweeps/step"] = benchmark::Counter(double(iterations) / double(state.iterations()));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_QuinticStepSecondOrder)
    ->ArgsProduct({{int(SolverKind::fixed_point), int(SolverKind::newton_direct), int(SolverKind::blended)},
                   {2, 8}});

void BM_QuinticRun(benchmark::State& state) {
  RunSpec spec;
  spec.formulation = state.range(0) ? Formulation::second_order : Formulation::first_order;
  spec.h = 1e-3;
  spec.t_end = 1.0;
  spec.thin = 1000;
  for (auto _ : state) {
    RunResult r = integrate(spec);
    benchmark::DoNotOptimize(r.report.total_iterations);
  }
  state.SetLabel(std::string(to_string(spec.formulation)));
}
BENCHMARK(BM_QuinticRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// args: s, d
void BM_KronApply(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix sm(s, s), g(d, d);
  for (double& v : sm.data()) v = dist(rng);
  for (double& v : g.data()) v = dist(rng);
  BlockVector x(s, d);
  for (double& v : x.data()) v = dist(rng);
  for (auto _ : state) {
    BlockVector y = kron_apply(sm, g, x);
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_KronApply)->ArgsProduct({{2, 4, 8}, {2, 8, 32}});

void BM_LUFactorSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(n, n);
  for (double& v : m.data()) v = dist(rng);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += double(n);
  Vector b(n, 1.0);
  for (auto _ : state) {
    LUFactor f(m);
    Vector x = f.solve(b);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_LUFactorSolve)->RangeMultiplier(2)->Range(2, 64);

void BM_BuildTableau(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int s = static_cast<int>(state.range(1));
  for (auto _ : state) {
    MethodTableau t = build_tableau(k, s);
    benchmark::DoNotOptimize(t.rho);
  }
}
BENCHMARK(BM_BuildTableau)->Args({2, 2})->Args({8, 2})->Args({12, 6})->Args({64, 10});

}  // namespace

BENCHMARK_MAIN();
