#include <benchmark/benchmark.h>

#include "fraclab/obstacle.hpp"
#include "fraclab/stable_mc.hpp"

using namespace fraclab;

namespace {

GridDomain window_grid(int n) {
  return GridDomain::interval(-1.0, 1.0, n).with_inner_domain(box_predicate({-0.5, -1.0}, {0.5, 1.0}));
}

void BM_Assemble1D(benchmark::State& state) {
  const GridDomain g = GridDomain::interval(-1.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble(g, 1.0));
}
BENCHMARK(BM_Assemble1D)->Arg(127)->Arg(255)->Arg(511)->Unit(benchmark::kMillisecond);

void BM_Assemble2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridDomain g = GridDomain::rectangle(-1.0, 1.0, -1.0, 1.0, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(g, 1.0));
}
BENCHMARK(BM_Assemble2D)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PrincipalEigenpair(benchmark::State& state) {
  const DiscreteOperator L = assemble(GridDomain::interval(-1.0, 1.0, static_cast<int>(state.range(0))), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(L));
}
BENCHMARK(BM_PrincipalEigenpair)->Arg(255)->Arg(511)->Unit(benchmark::kMillisecond);

void BM_Psor(benchmark::State& state) {
  const GridDomain g = window_grid(static_cast<int>(state.range(0)));
  const DiscreteOperator L = assemble(g, 1.0);
  const ObstacleVector h = build_obstacle(g);
  const Vector f = Vector::Constant(static_cast<Eigen::Index>(g.size()), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_coercive_obstacle(L, f, h));
}
BENCHMARK(BM_Psor)->Arg(127)->Arg(255)->Unit(benchmark::kMillisecond);

void BM_PenaltyActiveSet(benchmark::State& state) {
  const GridDomain g = window_grid(static_cast<int>(state.range(0)));
  const DiscreteOperator L = assemble(g, 1.0);
  const ObstacleVector h = build_obstacle(g);
  const Vector f = Vector::Constant(static_cast<Eigen::Index>(g.size()), 5.0);
  for (auto _ : state) {
    PenaltySolver ps(L, h, 1e6);
    benchmark::DoNotOptimize(ps.solve(f));
  }
}
BENCHMARK(BM_PenaltyActiveSet)->Arg(127)->Arg(255)->Unit(benchmark::kMillisecond);

void BM_MonotoneSolve(benchmark::State& state) {
  const GridDomain g = window_grid(127);
  const DiscreteOperator L = assemble(g, 1.0);
  const ObstacleVector h = build_obstacle(g);
  const SpectralPair sp = principal_eigenpair(L);
  const double a = 0.5 * (sp.lambda + inner_eigenpair(L).lambda);
  SolveOptions opts;
  opts.verify = false;
  opts.inner_solver = state.range(0) ? InnerSolver::penalty : InnerSolver::psor;
  for (auto _ : state) benchmark::DoNotOptimize(monotone_solve(L, a, h, scaled_ground_state(sp, h), opts));
}
BENCHMARK(BM_MonotoneSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_StableSteps(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  Rng rng = path_rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_stable_step(alpha, 1e-3, 1, rng));
}
BENCHMARK(BM_StableSteps)->Arg(5)->Arg(10)->Arg(15)->Arg(20);

}  // namespace
BENCHMARK_MAIN();
