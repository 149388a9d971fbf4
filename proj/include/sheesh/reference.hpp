#pragma once

#include <vector>

#include "sheesh/kmeans.hpp"

// Single-threaded, unchunked versions of the hot kernels. Tests compare the
// parallel engine against these and the benchmark target times both.
namespace sheesh::reference {

/// Nearest center per point by a plain loop (ties to the lower id).
std::vector<NodeId> assign_exact(const PointsView& points, const PointsView& centers);

/// One Lloyd pass over in-memory points: assignment, then means in double.
/// Empty clusters keep their coordinates.
IterationResult lloyd_step(const PointsView& points, const CentersState& centers);

}  // namespace sheesh::reference
