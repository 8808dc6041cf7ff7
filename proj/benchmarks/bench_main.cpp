#include <map>

#include <benchmark/benchmark.h>

#include "roylab/experiment.hpp"
#include "roylab/least_squares.hpp"
#include "roylab/truncated_normal.hpp"

namespace {

using namespace roylab;

const ExperimentConfig& moderate() {
  static const ExperimentConfig cfg = builtin_scenario("moderate-shocks");
  return cfg;
}

const PanelDataset& panel_of(int n) {
  static std::map<int, PanelDataset> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  SeedConfig seed = moderate().seed_for(0);
  seed.n_workers = n;
  SimulationOptions opts;
  opts.keep_latent = false;
  auto careers = simulate_careers(seed, moderate().parameters(), moderate().frame, moderate().grouping, opts);
  return cache.emplace(n, flatten(careers, moderate().frame)).first->second;
}

void BM_Simulate(benchmark::State& state) {
  SeedConfig seed = moderate().seed_for(0);
  seed.n_workers = static_cast<int>(state.range(0));
  const ParameterSet params = moderate().parameters();
  SimulationOptions opts;
  opts.keep_latent = false;
  for (auto _ : state) {
    auto careers = simulate_careers(seed, params, moderate().frame, moderate().grouping, opts);
    benchmark::DoNotOptimize(careers.data());
  }
  state.SetItemsProcessed(state.iterations() * seed.n_workers);
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state, Method method) {
  const PanelDataset& panel = panel_of(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto est = estimate(panel, method, moderate().frame, moderate().grouping, moderate().occupations);
    benchmark::DoNotOptimize(est.pi_cum.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(panel.diffs.size()));
}
BENCHMARK_CAPTURE(BM_Estimate, ols, Method::ols)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Estimate, iv, Method::iv)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Estimate, amenity, Method::ols_amenity)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Estimate, fe_stint, Method::fe_stint)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_CollapseRows(benchmark::State& state) {
  const PanelDataset& panel = panel_of(5000);
  const auto d = build_ols_design(panel, moderate().frame, moderate().grouping, 4);
  for (auto _ : state) {
    auto cells = collapse_rows(d.X, d.y);
    benchmark::DoNotOptimize(cells.mean_y.data());
  }
}
BENCHMARK(BM_CollapseRows)->Unit(benchmark::kMillisecond);

void BM_TruncatedNormal(benchmark::State& state) {
  const double upper = static_cast<double>(state.range(0));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(truncated_normal_upper(0.0, 1.0, upper, rng));
}
BENCHMARK(BM_TruncatedNormal)->Arg(1)->Arg(0)->Arg(-3);

}  // namespace

BENCHMARK_MAIN();
