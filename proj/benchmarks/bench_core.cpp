#include <benchmark/benchmark.h>

#include <kfp/discretization.hpp>
#include <kfp/evolution.hpp>
#include <kfp/hypocoercivity.hpp>

using namespace kfp;

namespace {

std::shared_ptr<const PhaseGrid> interval(int n) {
  GridSpec s;
  s.nx = n;
  s.nv = n;
  return build_grid(Domain::interval(1.0, Accommodation(0.5)), s);
}

std::shared_ptr<const PhaseGrid> disk(int n) {
  GridSpec s;
  s.nx = n;
  s.nv = n / 2;
  s.spatial_angles = 16;
  s.velocity_angles = 16;
  return build_grid(Domain::disk(1.0, Accommodation(0.5)), s);
}

void BM_AssembleInterval(benchmark::State& state) {
  const auto g = interval(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_generator(g));
  state.SetComplexityN(g->size());
}
BENCHMARK(BM_AssembleInterval)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_AssembleDisk(benchmark::State& state) {
  const auto g = disk(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_generator(g));
}
BENCHMARK(BM_AssembleDisk)->Arg(8)->Arg(16);

void BM_ImexStep(benchmark::State& state) {
  const auto g = interval(static_cast<int>(state.range(0)));
  const Generator L = assemble_generator(g);
  const Stepper step(L, Scheme::Imex, resolve_dt(L, {}));
  Field f = g->steady_state();
  for (auto _ : state) {
    step.step(f);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * g->size());
}
BENCHMARK(BM_ImexStep)->RangeMultiplier(2)->Range(32, 512);

void BM_ImplicitStep(benchmark::State& state) {
  const auto g = interval(static_cast<int>(state.range(0)));
  const Generator L = assemble_generator(g);
  const Stepper step(L, Scheme::FullImplicit, 0.01);
  Field f = g->steady_state();
  for (auto _ : state) {
    step.step(f);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_ImplicitStep)->Arg(32)->Arg(64)->Arg(128);

void BM_PoissonSolve(benchmark::State& state) {
  const auto g = disk(static_cast<int>(state.range(0)));
  const PoissonSolver P(g);
  Eigen::VectorXd rho(g->nx());
  for (int i = 0; i < g->nx(); ++i) rho[i] = g->centers()[i].x();
  for (auto _ : state) benchmark::DoNotOptimize(P.solve(rho));
}
BENCHMARK(BM_PoissonSolve)->Arg(16)->Arg(32)->Arg(64);

void BM_Certificate(benchmark::State& state) {
  GridSpec s;
  s.nx = static_cast<int>(state.range(0));
  s.nv = static_cast<int>(state.range(0));
  const auto g = build_grid(Domain::interval(1.0), s);
  const Generator L = assemble_generator(g);
  for (auto _ : state) benchmark::DoNotOptimize(coercivity_certificate(L, {0.25}));
}
BENCHMARK(BM_Certificate)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
