#include <omp.h>

#include <algorithm>
#include <random>

#include <benchmark/benchmark.h>

#include "aptail/clusters.hpp"
#include "aptail/kernels.hpp"
#include "aptail/sampling.hpp"

using namespace aptail;

namespace {

void BM_OverlapSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::overlap_counts_serial(static_cast<int>(st.range(0)), 3));
}
void BM_OverlapOmp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::overlap_counts_omp(static_cast<int>(st.range(0)), 3));
}
BENCHMARK(BM_OverlapSerial)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OverlapOmp)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_CensusSerial(benchmark::State& st) {
  auto idx = build_index(static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::subset_census_serial(*idx));
}
void BM_CensusOmp(benchmark::State& st) {
  auto idx = build_index(static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::subset_census_omp(*idx));
}
BENCHMARK(BM_CensusSerial)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CensusOmp)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

// masks of the progressions of AP_3([60]) restricted to a random 20-set
std::vector<std::uint32_t> profile_masks(int n) {
  auto idx = build_index(60, 3);
  std::mt19937_64 g(3);
  std::vector<int> pos(61, -1), all(60);
  for (int i = 0; i < 60; ++i) all[i] = i + 1;
  std::shuffle(all.begin(), all.end(), g);
  for (int j = 0; j < n; ++j) pos[all[j]] = j;
  std::vector<std::uint32_t> masks;
  for (std::size_t id = 0; id < idx->size(); ++id) {
    std::uint32_t m = 0;
    for (int e : idx->progression(id))
      if (pos[e] >= 0) m |= 1u << pos[e];
    if (m) masks.push_back(m);
  }
  return masks;
}

void BM_MaxProfileSerial(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  auto masks = profile_masks(n);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::max_profile_serial(masks, n, 3));
}
void BM_MaxProfileOmp(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  auto masks = profile_masks(n);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::max_profile_omp(masks, n, 3));
}
BENCHMARK(BM_MaxProfileSerial)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxProfileOmp)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

// same run, one thread against all of them
void BM_McBlocks(benchmark::State& st) {
  auto mp = exact_moments(build_index(200, 3), 0.1);
  const int threads = st.range(0) ? omp_get_num_procs() : 1;
  omp_set_num_threads(threads);
  for (auto _ : st) benchmark::DoNotOptimize(mc_tail(mp, mp.mu + 10, 200000, 1));
  omp_set_num_threads(omp_get_num_procs());
  st.SetLabel(std::to_string(threads) + " threads");
}
BENCHMARK(BM_McBlocks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EnumerateSerial(benchmark::State& st) {
  auto H = ap_hypergraph(*build_index(static_cast<int>(st.range(0)), 3));
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_clusters_serial(H, -1, 3, {}));
}
void BM_EnumerateOmp(benchmark::State& st) {
  auto H = ap_hypergraph(*build_index(static_cast<int>(st.range(0)), 3));
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_clusters(H, -1, 3, {}));
}
BENCHMARK(BM_EnumerateSerial)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateOmp)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
