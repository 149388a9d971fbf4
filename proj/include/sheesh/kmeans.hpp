#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sheesh/dataset.hpp"
#include "sheesh/graph.hpp"
#include "sheesh/metric.hpp"
#include "sheesh/sanns.hpp"

namespace sheesh {

/// k centers of dimension d, row-major.
struct CentersState {
  std::vector<float> centers;
  std::size_t k = 0;
  std::size_t dim = 0;
  std::size_t iteration = 0;

  CentersState() = default;
  CentersState(std::vector<float> coords, std::size_t dim_);

  PointsView view() const { return PointsView(std::span<const float>(centers), dim); }
  std::span<const float> row(std::size_t i) const { return {centers.data() + i * dim, dim}; }
};

/// Per point, up to m (center, squared distance) pairs, ascending; the first
/// entry is the point's assigned center.
class MultiAssignment {
 public:
  MultiAssignment() = default;
  MultiAssignment(std::size_t n, std::size_t m);

  std::size_t size() const noexcept { return counts_.size(); }
  std::size_t width() const noexcept { return m_; }
  bool empty() const noexcept { return counts_.empty(); }

  std::span<const NodeId> ids(std::size_t i) const { return {ids_.data() + i * m_, counts_[i]}; }
  std::span<const float> distances(std::size_t i) const { return {dists_.data() + i * m_, counts_[i]}; }
  bool has(std::size_t i) const { return counts_[i] > 0; }
  NodeId assigned(std::size_t i) const;
  float assigned_distance(std::size_t i) const;

  /// Stores up to width() entries of `list` for point i.
  void set(std::size_t i, std::span<const Neighbor> list);

  /// Seed lists for points [start, start + count).
  SeedView seeds(std::size_t start) const;

  friend bool operator==(const MultiAssignment&, const MultiAssignment&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<NodeId> ids_;
  std::vector<float> dists_;
  std::vector<std::uint32_t> counts_;
};

/// One pass: assign every point against centers C, then recompute C'.
struct IterationStats {
  std::size_t iteration = 0;
  /// Sum of squared distances of each point to its assigned center in C'.
  double score = 0.0;
  /// Seconds since the run started, at the end of this iteration.
  double wall_seconds = 0.0;
  /// Mean Euclidean distance between C and C'.
  double avg_center_movement = 0.0;
  /// Points whose assigned center differs from the previous pass (all of
  /// them when there is none).
  std::size_t reassigned_count = 0;
  /// Point-to-center distance evaluations during reassignment.
  std::size_t distance_count = 0;
};

/// Sum over points of sq_l2(p, C[assigned(p)]) in double precision.
double score(const VectorSet& points, const MultiAssignment& assignment, const CentersState& centers,
             std::size_t chunk_size = 65536);

/// Objective with every point at its true nearest center.
double exact_score(const VectorSet& points, const CentersState& centers, std::size_t chunk_size = 65536);

/// k distinct points by single-pass reservoir sampling.
CentersState init_uniform(const VectorSet& points, std::size_t k, std::uint64_t seed);

/// D^2 sampling. Needs the points in memory.
CentersState init_kmeanspp(const VectorSet& points, std::size_t k, std::uint64_t seed);

struct IterationResult {
  CentersState centers;
  MultiAssignment assignment;
  IterationStats stats;
};

struct GraphIterationResult {
  CentersState centers;
  MultiAssignment assignment;
  IterationStats stats;
  SearchGraph graph;
};

/// One exact Lloyd step. `previous` (optional) only feeds reassigned_count.
IterationResult lloyd_exact_iteration(const VectorSet& points, const CentersState& centers,
                                      const MultiAssignment* previous = nullptr, std::size_t chunk_size = 0);

/// One Lloyd step with unseeded hierarchical search over a graph built from
/// scratch. With avoid_regress and a previous assignment, a point keeps its
/// center unless the search found a strictly closer one.
GraphIterationResult blackbox_iteration(const VectorSet& points, const CentersState& centers, const BuildParams& bp,
                                        const SearchParams& sp, bool avoid_regress,
                                        const MultiAssignment* previous = nullptr, std::size_t chunk_size = 0);

struct SheeshOptions {
  BuildParams build;
  /// result_count is the number of stored assignments per point.
  SearchParams search;
  bool use_rebuilds = true;
  bool enable_seeds = true;
  bool enable_bulk = true;
  bool enable_min_iter = true;
  bool avoid_regress = true;
  std::uint64_t projection_seed = 0;
  std::size_t chunk_size = 0;
};

/// One SHEESH step: refresh (or build) the graph over `centers`, reassign
/// every chunk with bulk seeded search carrying `seeds` from the previous
/// step, then recompute. avoid_regress compares against the best entry of
/// `seeds`. `previous` only feeds reassigned_count; when null, `seeds` plays
/// that role.
GraphIterationResult sheesh_iteration(const VectorSet& points, const CentersState& centers,
                                      const MultiAssignment& seeds, const SearchGraph* previous_graph,
                                      const SheeshOptions& options, const MultiAssignment* previous = nullptr);

// Driver -----------------------------------------------------------------

enum class Engine { lloyd, blackbox, sheesh };
enum class InitMethod { uniform, kmeanspp };
enum class ScoreMode { assigned, exact };

const char* to_string(Engine e);
const char* to_string(InitMethod m);

struct RunConfig {
  std::filesystem::path dataset;
  std::string format = "fvecs";
  std::size_t k = 0;
  Engine engine = Engine::sheesh;
  InitMethod init = InitMethod::uniform;
  std::uint64_t seed = 0;
  double time_limit_seconds = 500.0;
  std::size_t max_iterations = 100;

  std::size_t ef_build = 200;
  std::size_t M = 60;
  /// Defaults to 10 * num_prev_assignments.
  std::optional<std::size_t> ef_search;
  std::size_t min_iterations = 21;
  std::size_t num_prev_assignments = 10;
  bool avoid_regress = true;
  bool enable_seeds = true;
  bool enable_bulk = true;
  bool enable_min_iter = true;
  bool use_rebuilds = true;

  std::size_t threads = 12;
  std::size_t chunk_size = 0;
  ScoreMode score_mode = ScoreMode::assigned;
  std::filesystem::path output;

  std::size_t effective_ef_search() const { return ef_search.value_or(10 * num_prev_assignments); }
  std::size_t effective_chunk_size() const { return chunk_size ? chunk_size : default_chunk_size(k); }

  /// Throws ConfigError. `n_points` is checked against k when known.
  void validate(std::optional<std::size_t> n_points = std::nullopt) const;
};

using IterationCallback = std::function<void(const IterationStats&)>;

/// init, then iterate until max_iterations, convergence of the exact engine,
/// or until an iteration finishes past the time limit. Iteration 0 is the
/// first pass over the initial centers; every row describes one pass.
std::vector<IterationStats> run_clustering(const RunConfig& config, const VectorSet& points,
                                           const IterationCallback& on_iteration = {},
                                           CentersState* final_centers = nullptr);

}  // namespace sheesh
