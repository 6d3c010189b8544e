#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "facexai/aggregation.hpp"
#include "facexai/eaoc.hpp"
#include "facexai/explanation.hpp"
#include "facexai/kernel_shap.hpp"
#include "facexai/semantics.hpp"
#include "facexai/synthetic_embedder.hpp"

namespace facexai {
namespace {

void BM_BuildMasks(benchmark::State& state) {
  const auto set = builtin_semantic_set("set2");
  const int size = static_cast<int>(state.range(0));
  const auto lm = canonical_landmarks(size, size);
  for (auto _ : state) benchmark::DoNotOptimize(build_masks(lm, set));
}
BENCHMARK(BM_BuildMasks)->Arg(64)->Arg(256);

void BM_ExactShapley(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(s);
  std::iota(a.begin(), a.end(), 1.0);
  CoalitionValueFn v = [&](Coalition z) {
    double x = 0.0;
    for (std::size_t n = 0; n < s; ++n) x += a[n] * z[n];
    return x * x;
  };
  for (auto _ : state) benchmark::DoNotOptimize(exact_shapley(s, v));
}
BENCHMARK(BM_ExactShapley)->Arg(8)->Arg(13)->Unit(benchmark::kMillisecond);

void BM_RankQuery(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> norms(static_cast<std::size_t>(state.range(0)));
  for (auto& x : norms) x = u(rng);
  const OutputSpace space(norms);
  std::size_t j = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eaoc_score(space, j, u(rng)));
    j = (j + 1) % norms.size();
  }
}
BENCHMARK(BM_RankQuery)->Arg(1000)->Arg(100000);

void BM_Borda(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<RankSequence> profile(static_cast<std::size_t>(state.range(0)), RankSequence(30));
  for (auto& r : profile) {
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::shuffle(r.begin(), r.end(), rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(borda_aggregate(profile));
}
BENCHMARK(BM_Borda)->Arg(48)->Arg(1000);

void BM_SingleRemoval(benchmark::State& state) {
  const auto set = builtin_semantic_set("set0");
  SyntheticDatasetConfig dc;
  dc.images = 2;
  dc.pairs = 1;
  dc.image_size = static_cast<int>(state.range(0));
  const auto ds = make_synthetic_dataset(set, dc);
  SyntheticEmbedderConfig ec;
  for (std::size_t n = 0; n < set.size(); ++n) ec.weights.push_back(static_cast<double>(set.size() - n));
  const SyntheticRegionEmbedder model(ds.samples[0].masks, ec);
  const std::vector<double> g(set.size(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        single_removal_s0(model, ds.samples[0], ds.samples[1], g, ds.region_names, {}));
  }
}
BENCHMARK(BM_SingleRemoval)->Arg(64)->Arg(160)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace facexai
BENCHMARK_MAIN();
