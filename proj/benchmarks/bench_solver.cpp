#include <benchmark/benchmark.h>

#include "reinsure/hjb.hpp"
#include "reinsure/simulate.hpp"

namespace {

reinsure::ModelParams figure_params(double k2) {
  reinsure::ModelInputs in;
  in.k2 = k2;
  return reinsure::ModelParams(in);
}

void BM_SolveFigure(benchmark::State& state) {
  const auto params = figure_params(0.25);
  reinsure::SolverConfig cfg;
  cfg.grid_n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto result = reinsure::solve(params, cfg);
    benchmark::DoNotOptimize(result.values.psi.data());
  }
}
BENCHMARK(BM_SolveFigure)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

// Outside the growth condition the problem is nontrivial and policy
// iteration needs many steps; this measures the solver machinery itself.
void BM_SolveTruncated(benchmark::State& state) {
  reinsure::ModelInputs in;
  in.zeta0 = 0.02;
  const reinsure::ModelParams params(in);
  reinsure::SolverConfig cfg;
  cfg.grid_n = static_cast<std::size_t>(state.range(0));
  cfg.require_assumptions = false;
  for (auto _ : state) {
    auto result = reinsure::solve(params, cfg);
    benchmark::DoNotOptimize(result.values.psi.data());
  }
}
BENCHMARK(BM_SolveTruncated)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SimulatePath(benchmark::State& state) {
  const auto params = figure_params(0.25);
  const auto policy = reinsure::FeedbackPolicy::constant(params.u_min(), 10.0);
  const double horizon = reinsure::default_horizon(params);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    reinsure::CounterRng rng(42, stream++);
    auto record = reinsure::simulate_path(params, policy, 5.0, horizon, rng);
    benchmark::DoNotOptimize(record.discounted_dividends);
  }
}
BENCHMARK(BM_SimulatePath);

} // namespace

BENCHMARK_MAIN();
