#include "sheesh/reference.hpp"

#include <cmath>

namespace sheesh::reference {

std::vector<NodeId> assign_exact(const PointsView& points, const PointsView& centers) {
  SHEESH_EXPECTS(points.dim == centers.dim && centers.rows > 0, "bad point/center shapes");
  std::vector<NodeId> out(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) {
    NodeId best = 0;
    float best_d = kernels::sq_l2(points.ptr(i), centers.ptr(0), points.dim);
    for (std::size_t c = 1; c < centers.rows; ++c) {
      const float d = kernels::sq_l2(points.ptr(i), centers.ptr(c), points.dim);
      if (d < best_d) {
        best_d = d;
        best = static_cast<NodeId>(c);
      }
    }
    out[i] = best;
  }
  return out;
}

IterationResult lloyd_step(const PointsView& points, const CentersState& centers) {
  const auto labels = assign_exact(points, centers.view());
  const std::size_t d = centers.dim;
  std::vector<double> sums(centers.k * d, 0.0);
  std::vector<std::size_t> counts(centers.k, 0);
  IterationResult r;
  r.assignment = MultiAssignment(points.rows, 1);
  for (std::size_t i = 0; i < points.rows; ++i) {
    const NodeId c = labels[i];
    for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += points.ptr(i)[j];
    ++counts[c];
    const Neighbor nb{c, kernels::sq_l2(points.ptr(i), centers.view().ptr(c), d)};
    r.assignment.set(i, {&nb, 1});
  }
  r.centers = centers;
  r.centers.iteration = centers.iteration + 1;
  double moved_total = 0.0;
  for (std::size_t c = 0; c < centers.k; ++c) {
    if (counts[c] == 0) continue;
    double moved = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const float v = static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
      moved += (static_cast<double>(v) - r.centers.centers[c * d + j]) *
               (static_cast<double>(v) - r.centers.centers[c * d + j]);
      r.centers.centers[c * d + j] = v;
    }
    moved_total += std::sqrt(moved);
  }
  double score = 0.0;
  for (std::size_t i = 0; i < points.rows; ++i) {
    const float* p = points.ptr(i);
    const float* c = r.centers.view().ptr(labels[i]);
    for (std::size_t j = 0; j < d; ++j) score += (static_cast<double>(p[j]) - c[j]) * (static_cast<double>(p[j]) - c[j]);
  }
  r.stats.iteration = centers.iteration;
  r.stats.score = score;
  r.stats.avg_center_movement = moved_total / static_cast<double>(centers.k);
  r.stats.reassigned_count = points.rows;
  r.stats.distance_count = points.rows * centers.k;
  return r;
}

}  // namespace sheesh::reference
