#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sheesh/common.hpp"
#include "sheesh/metric.hpp"

namespace sheesh {

struct BuildParams {
  std::size_t ef_build = 200;
  /// Out-degree cap, applied at every level.
  std::size_t M = 60;
  std::uint64_t level_seed = 0x5eed5eedULL;

  /// Non-fatal advice about the parameter choice (ef_build < M).
  std::optional<std::string> warning() const;
};

struct SearchParams {
  /// Beam width b (ef_search).
  std::size_t beam_width = 100;
  /// Minimum number of extractions from the candidate set before the usual
  /// stopping rule is allowed to fire.
  std::size_t min_iterations = 0;
  std::size_t result_count = 10;
  /// Distance evaluations fully prefetch the vector this many positions ahead.
  std::size_t prefetch_ahead = 4;
};

struct SearchTrace {
  /// Ascending by (distance, id); at most result_count entries.
  std::vector<Neighbor> results;
  std::size_t visited_count = 0;
  std::size_t distance_count = 0;
  /// Extractions from the candidate set.
  std::size_t iterations = 0;
  /// Level-1 node reached by the greedy descent (hierarchical searches only).
  NodeId descent_node = kInvalidNode;
};

/// HNSW level of a node: floor(-ln(u) / ln(M)) with u a uniform hash of
/// (id, level_seed) in (0, 1]. Pure, so memberships survive rebuilds.
int node_level(NodeId id, std::uint64_t level_seed, std::size_t M);

/// Leveled search graph over a fixed-capacity set of centers with ids
/// 0..capacity-1. Level memberships are fixed at construction from the
/// level law; nodes become searchable once inserted.
class SearchGraph {
 public:
  SearchGraph(std::size_t dim, std::size_t capacity, const BuildParams& bp);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return inserted_; }
  const BuildParams& params() const noexcept { return params_; }

  /// Highest level holding an inserted node (0 for an empty graph).
  int max_level() const noexcept { return max_level_; }
  NodeId entry_point() const noexcept { return entry_; }
  int level_of(NodeId id) const { return node_levels_.at(id); }
  bool contains(NodeId id) const noexcept { return id < capacity_ && present_[id] != 0; }

  std::span<const NodeId> neighbors(int level, NodeId id) const;
  PointsView coords() const noexcept { return PointsView(std::span<const float>(coords_), dim_); }
  std::span<const float> coord(NodeId id) const { return {coords_.data() + std::size_t{id} * dim_, dim_}; }

  /// Ids of all nodes whose level is at least `level`, ascending.
  const std::vector<NodeId>& members(int level) const { return levels_.at(static_cast<std::size_t>(level)).members; }
  int num_levels() const noexcept { return static_cast<int>(levels_.size()); }

  /// Binary snapshot for debugging; the format is versioned but may change.
  void save(const std::filesystem::path& path) const;
  static SearchGraph load(const std::filesystem::path& path);

  friend bool same_topology(const SearchGraph& a, const SearchGraph& b);

 private:
  friend void insert(SearchGraph&, NodeId, std::span<const float>, const BuildParams&);
  friend SearchGraph bulk_build(const PointsView&, const BuildParams&);
  friend SearchGraph rebuild_from_previous(const SearchGraph&, const PointsView&, const BuildParams&);
  friend class GraphBuilder;

  struct Level {
    std::vector<NodeId> members;
    /// Node id -> row in `edges`; empty at level 0, where the row is the id.
    std::vector<std::uint32_t> slot;
    std::vector<NodeId> edges;
    std::vector<std::uint32_t> degree;
  };

  std::size_t row_of(int level, NodeId id) const;
  void set_neighbors(int level, NodeId id, std::span<const NodeId> list);
  void place(NodeId id, std::span<const float> coords);

  std::size_t dim_ = 0;
  std::size_t capacity_ = 0;
  BuildParams params_;
  std::vector<float> coords_;
  std::vector<int> node_levels_;
  std::vector<std::uint8_t> present_;
  std::vector<Level> levels_;
  std::size_t inserted_ = 0;
  int max_level_ = 0;
  NodeId entry_ = kInvalidNode;
};

/// Beam search on one level. Candidate and nearest sets start from all
/// `starts` (nearest set truncated to the best b); unvisited neighbors of
/// each extracted candidate are collected before their distances are
/// evaluated. Stops when the usual rule fires and at least
/// sp.min_iterations extractions have happened.
SearchTrace beam_search(const SearchGraph& g, std::span<const float> q, std::span<const NodeId> starts,
                        const SearchParams& sp, int level = 0);

struct Descent {
  NodeId node = kInvalidNode;
  std::size_t distance_count = 0;
};

/// Greedy (b = 1) descent from the entry point through levels top..1.
/// Returns the node reached at level 1, or the entry point when the graph
/// has a single level.
Descent descend(const SearchGraph& g, std::span<const float> q);

/// Standard hierarchical search; `seeds` join the descent result as extra
/// starting points at level 0 only.
SearchTrace hierarchical_search(const SearchGraph& g, std::span<const float> q, std::span<const NodeId> seeds,
                                const SearchParams& sp);

/// Level-0 part of hierarchical_search for a precomputed descent.
SearchTrace search_from_descent(const SearchGraph& g, std::span<const float> q, const Descent& descent,
                                std::span<const NodeId> seeds, const SearchParams& sp);

/// HNSW neighbor-selection heuristic. `candidates` must be ascending by
/// distance to the base point; a candidate is kept unless some already
/// kept neighbor is strictly closer to it than the base is.
std::vector<NodeId> select_neighbors(const PointsView& coords, std::span<const Neighbor> candidates,
                                     std::size_t M);

/// Sequential HNSW insertion. Pruning of reverse edges can strand nodes;
/// call repair_connectivity once the inserts are done.
void insert(SearchGraph& g, NodeId id, std::span<const float> coords, const BuildParams& bp);

/// Parallel batched construction over all rows of `points`. Batches search
/// the graph as it stood before the batch, so the result does not depend on
/// the thread count.
SearchGraph bulk_build(const PointsView& points, const BuildParams& bp);

/// Refreshes a previous iteration's graph for moved centers: every node
/// whose distances to its old neighbors changed is re-searched from those
/// neighbors, merged and re-pruned; new edges are offered back to their
/// targets. Level memberships and the entry point are kept.
SearchGraph rebuild_from_previous(const SearchGraph& prev, const PointsView& new_coords, const BuildParams& bp);

/// Makes every level reachable from the entry point by adding an edge from
/// the nearest reachable node to each stranded one. bulk_build and
/// rebuild_from_previous already do this.
void repair_connectivity(SearchGraph& g);

/// Number of nodes reachable at level 0 from the entry point.
std::size_t reachable_count(const SearchGraph& g);

}  // namespace sheesh
