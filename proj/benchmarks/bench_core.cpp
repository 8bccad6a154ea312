#include <benchmark/benchmark.h>

#include "bivrec/gp.hpp"
#include "bivrec/mcmc.hpp"
#include "bivrec/rng.hpp"
#include "bivrec/synthetic.hpp"

using namespace bivrec;

namespace {

std::vector<GpSite> bench_sites(int n) {
  Rng rng(42);
  std::vector<GpSite> s(n);
  for (auto& site : s) {
    site = GpSite{rng.uniform(0.0, 400.0), rng.uniform(0.0, 400.0), 0.0};
  }
  return s;
}

void BM_TruncatedNormal(benchmark::State& state) {
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.trunc_normal_signed(0.7, true);
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_TruncatedNormal);

void BM_NormalDraw(benchmark::State& state) {
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.normal();
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalDraw);

void BM_CovMatrix(benchmark::State& state) {
  const auto sites = bench_sites(static_cast<int>(state.range(0)));
  const KernelSpec k = KernelSpec::iso(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cov_matrix(k, sites));
  }
}
BENCHMARK(BM_CovMatrix)->Arg(10)->Arg(40);

void BM_KrigeSystem(benchmark::State& state) {
  const auto obs = bench_sites(static_cast<int>(state.range(0)));
  const auto grid = bench_sites(200);
  const KernelSpec k = KernelSpec::iso(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(krige_system(k, obs, grid));
  }
}
BENCHMARK(BM_KrigeSystem)->Arg(10)->Arg(40);

void BM_GibbsSweep(benchmark::State& state) {
  SyntheticSpec spec;
  spec.n_sites = static_cast<int>(state.range(0));
  spec.n_years = 20;
  spec.n_days = 30;
  const SyntheticData data = generate_synthetic(spec, 7);
  std::vector<StationMeta> metas;
  for (const auto& st : data.stations) metas.push_back(st.meta);
  FitData fd = prepare_fit_data(data.truth_panel, metas, false);
  GibbsSampler g(fd, VariantSpec{Variant::M2}, PriorConfig{},
                 {Signal::Max, Signal::Min}, Rng(3));
  for (auto _ : state) {
    g.sweep();
  }
  state.SetItemsProcessed(state.iterations() * fd.n_obs() * 2);
}
BENCHMARK(BM_GibbsSweep)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
