#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sheesh/kmeans.hpp"

namespace sheesh::detail {

/// Per-cluster double-precision sums for the centroid update and the
/// objective at the updated centers.
class Accumulator {
 public:
  Accumulator(std::size_t k, std::size_t dim);

  void add(std::span<const float> p, NodeId c);

  struct Outcome {
    CentersState centers;
    double score = 0.0;
    double movement = 0.0;
  };
  Outcome finish(const CentersState& old) const;

 private:
  std::size_t k_;
  std::size_t dim_;
  std::vector<double> sums_;
  std::vector<double> sumsq_;
  std::vector<std::size_t> counts_;
};

/// Puts `previous` first unless the list already starts strictly closer.
void apply_guard(std::vector<Neighbor>& list, NodeId previous, float previous_distance, std::size_t width);

/// Fills one candidate list per chunk point, returns distances evaluated.
using ChunkAssigner = std::function<std::size_t(const Chunk&, std::vector<std::vector<Neighbor>>&)>;

IterationResult reassign_pass(const VectorSet& points, const CentersState& centers, std::size_t width,
                              const MultiAssignment* guard, const MultiAssignment* previous,
                              std::size_t chunk_size, const ChunkAssigner& assign);

std::size_t assign_exact_chunk(const Chunk& chunk, const PointsView& centers,
                               std::vector<std::vector<Neighbor>>& lists);

}  // namespace sheesh::detail
