// Parallel kernels against their serial references.
//
//   bench_kernels --benchmark_filter=LloydStep
//
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>

#include "sheesh/dataset.hpp"
#include "sheesh/graph.hpp"
#include "sheesh/kmeans.hpp"
#include "sheesh/reference.hpp"

using namespace sheesh;

namespace {

constexpr std::size_t kDim = 32;

const VectorSet& points() {
  static const VectorSet p = gen_gaussian_mixture(20'000, kDim, 200, 0.05f, 1);
  return p;
}

const CentersState& centers(std::size_t k) {
  static std::map<std::size_t, CentersState> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, init_uniform(points(), k, 2)).first;
  return it->second;
}

void BM_AssignSerialReference(benchmark::State& state) {
  const auto& c = centers(static_cast<std::size_t>(state.range(0)));
  const PointsView pv(points().data(), kDim);
  for (auto _ : state) benchmark::DoNotOptimize(reference::assign_exact(pv, c.view()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().size() * c.k));
}

void BM_LloydStepParallel(benchmark::State& state) {
  const auto& c = centers(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lloyd_exact_iteration(points(), c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().size() * c.k));
}

void BM_LloydStepSerialReference(benchmark::State& state) {
  const auto& c = centers(static_cast<std::size_t>(state.range(0)));
  const PointsView pv(points().data(), kDim);
  for (auto _ : state) benchmark::DoNotOptimize(reference::lloyd_step(pv, c));
}

// Beam search over a fixed graph with and without the vector prefetch.
void BM_BeamSearch(benchmark::State& state) {
  static const SearchGraph g = [] {
    BuildParams bp;
    bp.M = 32;
    bp.ef_build = 100;
    return bulk_build(centers(20'000 / 4).view(), bp);
  }();
  SearchParams sp;
  sp.beam_width = 64;
  sp.result_count = 10;
  sp.prefetch_ahead = static_cast<std::size_t>(state.range(0));
  const PointsView pv(points().data(), kDim);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hierarchical_search(g, pv.row(i), {}, sp));
    i = (i + 7919) % pv.rows;
  }
}

}  // namespace

BENCHMARK(BM_AssignSerialReference)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LloydStepParallel)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LloydStepSerialReference)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BeamSearch)->Arg(0)->Arg(4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
