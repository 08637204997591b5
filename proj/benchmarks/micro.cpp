#include <algorithm>
#include <vector>

#include <benchmark/benchmark.h>

#include "mlsort/mlsort.hpp"

using namespace mlsort;

namespace {

KeyVector data_for(std::int64_t n) { return generate(preset("uniform", 1), static_cast<std::size_t>(n)); }

SortConfig config(std::size_t m) {
  SortConfig cfg;
  cfg.train.m = m;
  cfg.on_warning = nullptr;
  return cfg;
}

std::shared_ptr<const CdfModel> trained(const KeyVector& data, std::size_t m) {
  return fit_model(draw_training_set(data, std::min<std::size_t>(10000, data.size()), 1), config(m));
}

void BM_GvmForward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  GvmParams p;
  for (std::size_t j = 0; j < m; ++j) {
    p.w1.push_back(1.0);
    p.w2.push_back(1.0 / m);
    p.b.push_back(-1.0 + 2.0 * (j + 0.5) / m);
    p.beta.push_back(4.0);
  }
  double x = -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gvm_forward(p, x));
    x += 1e-9;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GvmForward)->Arg(10)->Arg(50);

void BM_BucketPlace(benchmark::State& state) {
  const auto data = data_for(state.range(0));
  const auto model = trained(data, 10);
  for (auto _ : state) {
    auto buckets = bucket_place(data, *model, data.size());
    benchmark::DoNotOptimize(buckets.keys().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BucketPlace)->RangeMultiplier(10)->Range(10000, 1000000)->Unit(benchmark::kMillisecond);

void BM_MlSort(benchmark::State& state) {
  const auto data = data_for(state.range(0));
  const auto cfg = config(10);
  for (auto _ : state) benchmark::DoNotOptimize(ml_sort(data, cfg).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlSort)->RangeMultiplier(10)->Range(10000, 1000000)->Unit(benchmark::kMillisecond);

void BM_StdSort(benchmark::State& state) {
  const auto data = data_for(state.range(0));
  for (auto _ : state) {
    auto copy = data;
    std::sort(copy.begin(), copy.end());
    benchmark::DoNotOptimize(copy.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StdSort)->RangeMultiplier(10)->Range(10000, 1000000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
