#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sheesh/dataset.hpp"
#include "sheesh/graph.hpp"

namespace sheesh {

/// Read-only per-point seed lists stored as fixed-stride rows with a count
/// per row. A default-constructed view yields empty lists.
struct SeedView {
  const NodeId* ids = nullptr;
  const std::uint32_t* counts = nullptr;
  std::size_t stride = 0;

  std::span<const NodeId> operator[](std::size_t i) const {
    if (ids == nullptr) return {};
    return {ids + i * stride, counts[i]};
  }
};

/// A single seeded query: hierarchical search with `seeds` as extra
/// level-0 starting points.
SearchTrace seeded_query(const SearchGraph& g, std::span<const float> q, std::span<const NodeId> seeds,
                         const SearchParams& sp);

/// Processing plan for one chunk of a bulk query.
struct BulkPlan {
  /// Chunk-local point indices per group, each in processing order.
  std::vector<std::vector<std::size_t>> groups;
  /// Group key of each group: the level-1 node its points descend to.
  std::vector<NodeId> group_keys;
  /// Per point, the greedy descent used both as group key and level-0 start.
  std::vector<Descent> descents;
};

/// Unit direction with i.i.d. Gaussian components, deterministic per seed.
std::vector<float> projection_direction(std::size_t dim, std::uint64_t seed);

/// Groups a chunk by each point's default initial point (the level-1 node
/// reached by descent) and orders every group by projection onto the
/// direction drawn from `projection_seed`, ties by point index.
BulkPlan plan_bulk(const Chunk& chunk, const SearchGraph& g, std::uint64_t projection_seed);
BulkPlan plan_bulk(const Chunk& chunk, const SearchGraph& g, std::span<const float> direction);

/// Runs a bulk plan. Within a group each point is seeded by its
/// predecessor's results (when `chain` is set) followed by its carried
/// seeds, duplicates removed. Groups run concurrently.
std::vector<SearchTrace> run_bulk(const SearchGraph& g, const Chunk& chunk, const SeedView& carried,
                                  const SearchParams& sp, const BulkPlan& plan, bool chain = true);

/// Merges `first` then `second`, dropping repeats, keeping first occurrences.
void merge_seeds(std::span<const NodeId> first, std::span<const NodeId> second, std::vector<NodeId>& out);

}  // namespace sheesh
