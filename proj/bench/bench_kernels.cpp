// Serial vs OpenMP kernels: quadrature sweeps and Ritz assembly.
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fracritz/ritz.hpp"

namespace {

using namespace fracritz;

Execution mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_Integrate(benchmark::State& state) {
  const PanelScheme scheme{static_cast<int>(state.range(0)), 3.0, SingularEnd::Lower};
  const auto rule = make_composite(0.0, 1.0, scheme, gauss_legendre(16));
  const auto f = [](double x) { return std::pow(x, -0.5) * std::cos(7.0 * x); };
  for (auto _ : state) benchmark::DoNotOptimize(integrate(f, rule, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rule.size()));
}
BENCHMARK(BM_Integrate)->ArgsProduct({{32, 256, 2048}, {0, 1}});

VariationalProblem quartic_problem() {
  VariationalProblem p;
  p.op = FractionalOperator(OperatorKind::RLDerivative, Side::Left, 0.5);
  p.lagrangian = Expr::parse(
      "(D - 16*gamma(6)/gamma(5.5)*x^4.5 + 20*gamma(4)/gamma(3.5)*x^2.5"
      " - 5/gamma(1.5)*x^0.5)^4");
  p.bc = {{0.0}, {1.0}};
  return p;
}

void BM_AssembleHessian(benchmark::State& state) {
  const auto problem = quartic_problem();
  const auto space = build_trial_space(problem, 8);
  QuadratureConfig qc;
  qc.panels = static_cast<int>(state.range(0));
  const RitzAssembler assembler(problem, space, make_discretization(problem, qc), mode(state));
  const std::vector<double> q(space.free_count(), 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assembler.objective(q));
    benchmark::DoNotOptimize(assembler.gradient(q));
    benchmark::DoNotOptimize(assembler.hessian(q));
  }
}
BENCHMARK(BM_AssembleHessian)->ArgsProduct({{32, 256}, {0, 1}});

void BM_Solve(benchmark::State& state) {
  const auto problem = quartic_problem();
  const auto space = build_trial_space(problem, 5);
  SolverOptions opts;
  opts.execution = mode(state);
  opts.grad_tol = 1e-20;
  opts.max_iterations = 400;
  for (auto _ : state) benchmark::DoNotOptimize(solve_stationary(problem, space, opts));
}
BENCHMARK(BM_Solve)->ArgsProduct({{0}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
