#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sheesh/common.hpp"

namespace sheesh {

/// Row-major view over `rows` points of dimension `dim`.
struct PointsView {
  const float* data = nullptr;
  std::size_t rows = 0;
  std::size_t dim = 0;

  PointsView() = default;
  PointsView(std::span<const float> flat, std::size_t d)
      : data(flat.data()), rows(d == 0 ? 0 : flat.size() / d), dim(d) {}

  const float* ptr(std::size_t i) const noexcept { return data + i * dim; }
  std::span<const float> row(std::size_t i) const noexcept { return {ptr(i), dim}; }
};

namespace kernels {

/// When set, distance kernels accumulate in double and round once at the
/// end. Must be configured before any concurrent use.
void set_wide_accumulation(bool enabled) noexcept;

namespace detail {
extern bool g_wide_accumulation;
}
inline bool wide_accumulation() noexcept { return detail::g_wide_accumulation; }

namespace detail {
typedef float f32x8 __attribute__((vector_size(32)));

inline f32x8 load8(const float* p) noexcept {
  f32x8 v;
  __builtin_memcpy(&v, p, sizeof v);
  return v;
}
}  // namespace detail

/// Two 8-lane accumulators folded in a fixed order, so results do not depend
/// on the target's vector width.
inline float sq_l2_f32(const float* a, const float* b, std::size_t dim) noexcept {
  detail::f32x8 s0 = {};
  detail::f32x8 s1 = {};
  std::size_t i = 0;
  for (; i + 16 <= dim; i += 16) {
    const detail::f32x8 x = detail::load8(a + i) - detail::load8(b + i);
    const detail::f32x8 y = detail::load8(a + i + 8) - detail::load8(b + i + 8);
    s0 += x * x;
    s1 += y * y;
  }
  if (i + 8 <= dim) {
    const detail::f32x8 x = detail::load8(a + i) - detail::load8(b + i);
    s0 += x * x;
    i += 8;
  }
  s0 += s1;
  float sum = ((s0[0] + s0[4]) + (s0[1] + s0[5])) + ((s0[2] + s0[6]) + (s0[3] + s0[7]));
  for (; i < dim; ++i) {
    const float diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

inline float sq_l2_f64(const float* a, const float* b, std::size_t dim) noexcept {
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (std::size_t i = 0; i < dim; ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return static_cast<float>(sum);
}

inline float sq_l2(const float* a, const float* b, std::size_t dim) noexcept {
  return wide_accumulation() ? sq_l2_f64(a, b, dim) : sq_l2_f32(a, b, dim);
}

/// Requests every cache line of a vector.
inline void prefetch_vector(const float* p, std::size_t dim) noexcept {
  const char* bytes = reinterpret_cast<const char*>(p);
  for (std::size_t off = 0; off < dim * sizeof(float); off += 64) __builtin_prefetch(bytes + off, 0, 3);
}

/// out[i] = sq_l2(q, points[ids[i]]). The vector `prefetch_ahead` positions
/// ahead in `ids` is fully prefetched before each distance is computed;
/// prefetch_ahead = 0 disables prefetching. Results do not depend on it.
void distances_by_id(const float* q, const PointsView& points, std::span<const NodeId> ids,
                     std::span<float> out, std::size_t prefetch_ahead = 4) noexcept;

}  // namespace kernels

/// Squared Euclidean distance.
float sq_l2(std::span<const float> a, std::span<const float> b);

/// The exact m nearest rows of `points` to `q`, ascending, ties by lower index.
std::vector<Neighbor> nearest_brute(std::span<const float> q, const PointsView& points, std::size_t m);

/// nearest_brute for each row of `queries`, parallel over queries.
std::vector<std::vector<Neighbor>> nearest_brute_batch(const PointsView& queries, const PointsView& points,
                                                       std::size_t m);

}  // namespace sheesh
