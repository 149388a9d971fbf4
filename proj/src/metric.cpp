#include "sheesh/metric.hpp"

#include <algorithm>

namespace sheesh {
namespace kernels {

namespace detail {
bool g_wide_accumulation = false;
}

void set_wide_accumulation(bool enabled) noexcept { detail::g_wide_accumulation = enabled; }

void distances_by_id(const float* q, const PointsView& points, std::span<const NodeId> ids,
                     std::span<float> out, std::size_t prefetch_ahead) noexcept {
  const std::size_t n = ids.size();
  if (prefetch_ahead > 0) {
    for (std::size_t i = 0; i < std::min(prefetch_ahead, n); ++i) prefetch_vector(points.ptr(ids[i]), points.dim);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (prefetch_ahead > 0 && i + prefetch_ahead < n) {
      prefetch_vector(points.ptr(ids[i + prefetch_ahead]), points.dim);
    }
    out[i] = sq_l2(q, points.ptr(ids[i]), points.dim);
  }
}

}  // namespace kernels

float sq_l2(std::span<const float> a, std::span<const float> b) {
  SHEESH_EXPECTS(a.size() == b.size(), "sq_l2: dimension mismatch");
  return kernels::sq_l2(a.data(), b.data(), a.size());
}

std::vector<Neighbor> nearest_brute(std::span<const float> q, const PointsView& points, std::size_t m) {
  SHEESH_EXPECTS(points.rows > 0, "nearest_brute: empty point set");
  SHEESH_EXPECTS(m <= points.rows, "nearest_brute: m exceeds the number of points");
  SHEESH_EXPECTS(q.size() == points.dim, "nearest_brute: dimension mismatch");
  std::vector<Neighbor> all(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) {
    all[i] = Neighbor{static_cast<NodeId>(i), kernels::sq_l2(q.data(), points.ptr(i), points.dim)};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end());
  all.resize(m);
  return all;
}

std::vector<std::vector<Neighbor>> nearest_brute_batch(const PointsView& queries, const PointsView& points,
                                                       std::size_t m) {
  std::vector<std::vector<Neighbor>> out(queries.rows);
  const auto nq = static_cast<std::ptrdiff_t>(queries.rows);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < nq; ++i) {
    out[static_cast<std::size_t>(i)] = nearest_brute(queries.row(static_cast<std::size_t>(i)), points, m);
  }
  return out;
}

}  // namespace sheesh
