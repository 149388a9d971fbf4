#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sheesh/common.hpp"
#include "sheesh/metric.hpp"

// Slow-preprocessing alpha-pruned search graph with provable greedy-search
// guarantees. Distances in this module are Euclidean, not squared.
namespace sheesh::vamana {

struct AlphaParams {
  double alpha = 2.0;
  double epsilon = 0.5;
  /// Construction is cubic; larger inputs are rejected.
  std::size_t max_points = 4096;
};

class AlphaGraph {
 public:
  std::size_t size() const noexcept { return adjacency_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const AlphaParams& params() const noexcept { return params_; }
  /// Largest over smallest pairwise distance.
  double aspect_ratio() const noexcept { return aspect_ratio_; }

  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_.at(u); }
  std::span<const float> point(NodeId u) const { return {points_.data() + std::size_t{u} * dim_, dim_}; }
  std::size_t max_degree() const;

  /// Approximation ratio reachable from any start: (a+1)/(a-1) + eps.
  double guarantee_ratio() const { return (params_.alpha + 1.0) / (params_.alpha - 1.0) + params_.epsilon; }

 private:
  friend AlphaGraph build_slow(const PointsView&, const AlphaParams&);

  std::size_t dim_ = 0;
  std::vector<float> points_;
  std::vector<std::vector<NodeId>> adjacency_;
  AlphaParams params_;
  double aspect_ratio_ = 1.0;
};

double distance(std::span<const float> a, std::span<const float> b);

/// For every u, scans all other points by increasing distance and keeps v
/// unless an already kept w has alpha * D(w, v) <= D(u, v). Requires
/// distinct points.
AlphaGraph build_slow(const PointsView& points, const AlphaParams& ap);

struct GreedyResult {
  NodeId best = kInvalidNode;
  double distance = 0.0;
  /// Nodes expanded, the start included.
  std::size_t visit_count = 0;
  std::size_t distance_count = 0;
};

/// Beam search with b = 1 from `start`.
GreedyResult greedy_search_counted(const AlphaGraph& g, std::span<const float> q, NodeId start);

struct SeededResult {
  GreedyResult search;
  /// D(seed, q) / D(nn, q) - 1, measured.
  double delta = 0.0;
  /// ceil(log_alpha((1 + delta) / eps)), at least 0.
  std::size_t visit_bound = 0;
  /// Visit (1-based) at which the current node first met the guarantee ratio.
  std::size_t visits_to_guarantee = 0;
  /// The seed is visit 1, so the bound allows visit_bound + 1 visits.
  bool guarantee_met = false;
};

std::size_t visit_bound(double alpha, double delta, double epsilon);

SeededResult seeded_greedy_search(const AlphaGraph& g, std::span<const float> q, NodeId seed);

/// Points sorted by their projection onto one random unit direction.
class ProjectionIndex {
 public:
  ProjectionIndex(const PointsView& points, std::uint64_t projection_seed);

  /// The point whose projection is closest to q's.
  NodeId seed_for(std::span<const float> q) const;

 private:
  double project(std::span<const float> v) const;

  std::vector<double> direction_;
  std::vector<std::pair<double, NodeId>> sorted_;
};

NodeId projection_seed(const PointsView& points, std::span<const float> q, std::uint64_t projection_seed);

}  // namespace sheesh::vamana
