#include "idde/bias.hpp"
#include "idde/coincidence.hpp"
#include "idde/dataset.hpp"
#include "idde/estimator.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_PairwiseRadii(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto threads = static_cast<unsigned>(state.range(1));
  const auto ds = idde::gen_hypercube(n, 10, 10, 1);
  idde::PairOptions opts;
  opts.threads = threads;
  for (auto _ : state) {
    auto profile = idde::pairwise_radii(ds, opts);
    benchmark::DoNotOptimize(profile.radii().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(idde::pair_count(n)));
}
BENCHMARK(BM_PairwiseRadii)
    ->ArgsProduct({{1000, 3000, 7000}, {1, 0}})
    ->Unit(benchmark::kMillisecond);

void BM_SampledRadii(benchmark::State& state) {
  const auto ds = idde::gen_hypercube(20000, 10, 10, 1);
  idde::PairOptions opts;
  opts.pair_budget = 1'000'000;
  opts.sample_size = static_cast<std::size_t>(state.range(0));
  opts.seed = 7;
  for (auto _ : state) {
    auto profile = idde::pairwise_radii(ds, opts);
    benchmark::DoNotOptimize(profile.radii().data());
  }
}
BENCHMARK(BM_SampledRadii)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_CurveResample(benchmark::State& state) {
  const auto profile = idde::pairwise_radii(idde::gen_circle(3000, 1), {});
  for (auto _ : state) {
    auto c = idde::curve(profile, idde::ResampleOptions{static_cast<std::size_t>(state.range(0))});
    benchmark::DoNotOptimize(c.points.data());
  }
}
BENCHMARK(BM_CurveResample)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MultiscaleScan(benchmark::State& state) {
  const auto profile = idde::pairwise_radii(idde::gen_hypercube(1000, 10, 10, 1), {});
  const auto c = idde::curve(profile, idde::ResampleOptions{500});
  for (auto _ : state) {
    auto plateau = idde::fine_scale_plateau(c, 0.25, 1.0 / 16);
    benchmark::DoNotOptimize(plateau);
  }
}
BENCHMARK(BM_MultiscaleScan);

void BM_InvertApparentId(benchmark::State& state) {
  idde::bias::InversionOptions opts;
  opts.mode = state.range(0) == 0 ? idde::bias::InversionMode::Integer : idde::bias::InversionMode::Continuous;
  for (auto _ : state) {
    benchmark::DoNotOptimize(idde::bias::invert_apparent_id(6990, 12.0, opts));
  }
}
BENCHMARK(BM_InvertApparentId)->Arg(0)->Arg(1);

void BM_BiasTable(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(idde::bias::bias_table(1600, 1, 200));
  }
}
BENCHMARK(BM_BiasTable);

} // namespace

BENCHMARK_MAIN();
