#include <benchmark/benchmark.h>

#include "robdet/lfd.hpp"
#include "robdet/limits.hpp"
#include "robdet/llr.hpp"
#include "robdet/sampler.hpp"
#include "robdet/sequential.hpp"

using namespace robdet;

namespace {

const NominalModel& model() {
  static const NominalModel m = NominalModel::gaussian_pair({-1.0, 1.0}, {1.0, 2.0});
  return m;
}

void BM_Integrate(benchmark::State& state) {
  const NominalModel& m = model();
  Quadrature q;
  q.panels = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const double v = integrate([&](double y) { return m.f0(y); }, m.support(), q);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_Integrate)->Arg(64)->Arg(512);

void BM_LevelSet(benchmark::State& state) {
  const LogLrProfile& prof = model().profile();
  double t = -1.0;
  for (auto _ : state) {
    const IntervalUnion region = prof.below(t);
    benchmark::DoNotOptimize(region.total_length());
    t = t < 3.0 ? t + 0.01 : -1.0;
  }
}
BENCHMARK(BM_LevelSet);

void BM_SolveMTest(benchmark::State& state) {
  for (auto _ : state) {
    const MTestSolution sol = solve_m_test(model(), 0.15, 0.05);
    benchmark::DoNotOptimize(sol.l_u);
  }
}
BENCHMARK(BM_SolveMTest)->Unit(benchmark::kMillisecond);

void BM_SolveHTest(benchmark::State& state) {
  for (auto _ : state) {
    const HTestSolution sol = solve_h_test(model(), 0.02, 0.02);
    benchmark::DoNotOptimize(sol.c_u);
  }
}
BENCHMARK(BM_SolveHTest)->Unit(benchmark::kMillisecond);

void BM_StatisticDistribution(benchmark::State& state) {
  const MTestSolution sol = solve_m_test(model(), 0.15, 0.05);
  const PiecewiseLLR llr = robust_llr(model(), sol);
  const Density g0 = lfd_density(model(), sol, 0);
  for (auto _ : state) {
    const MixedDensity d = statistic_distribution(model(), llr, g0, 2048);
    benchmark::DoNotOptimize(d.total_mass());
  }
}
BENCHMARK(BM_StatisticDistribution)->Unit(benchmark::kMillisecond);

void BM_SprtExact(benchmark::State& state) {
  const MTestSolution sol = solve_m_test(model(), 0.01, 0.01);
  const PiecewiseLLR llr = robust_llr(model(), sol);
  const MixedDensity d = statistic_distribution(model(), llr, lfd_density(model(), sol, 0), 0, {},
                                                0.005);
  SprtConfig cfg;
  cfg.log_t_l = -3.0;
  cfg.log_t_u = 3.0;
  for (auto _ : state) {
    const SprtRun run = sprt_exact_run(d, cfg);
    benchmark::DoNotOptimize(run.p_reject);
  }
}
BENCHMARK(BM_SprtExact)->Unit(benchmark::kMillisecond);

void BM_SprtMonteCarlo(benchmark::State& state) {
  const MTestSolution sol = solve_m_test(model(), 0.01, 0.01);
  const PiecewiseLLR llr = robust_llr(model(), sol);
  const Density g0 = lfd_density(model(), sol, 0);
  SprtConfig cfg;
  cfg.log_t_l = -3.0;
  cfg.log_t_u = 3.0;
  cfg.mc_runs = 10000;
  cfg.workers = 1;
  for (auto _ : state) {
    const SprtRun run = sprt_monte_carlo_run(model(), llr, g0, cfg);
    benchmark::DoNotOptimize(run.p_reject);
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * cfg.mc_runs);
}
BENCHMARK(BM_SprtMonteCarlo)->Unit(benchmark::kMillisecond);

void BM_SamplerDraw(benchmark::State& state) {
  const CdfSampler sampler(model().density(0), model().y_min(), model().y_max());
  CounterRng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_SamplerDraw);

}  // namespace

BENCHMARK_MAIN();
