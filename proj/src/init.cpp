#include <algorithm>
#include <random>

#include "sheesh/kmeans.hpp"

namespace sheesh {

CentersState init_uniform(const VectorSet& points, std::size_t k, std::uint64_t seed) {
  SHEESH_EXPECTS(k >= 1 && k <= points.size(), "k must be in [1, |P|]");
  const std::size_t d = points.dim();
  std::mt19937_64 rng(seed);
  std::vector<float> reservoir(k * d);
  std::size_t seen = 0;
  stream_chunks(points, default_chunk_size(k), [&](const Chunk& chunk) {
    for (std::size_t i = 0; i < chunk.count; ++i, ++seen) {
      std::size_t slot = seen;
      if (seen >= k) {
        slot = std::uniform_int_distribution<std::size_t>(0, seen)(rng);
        if (slot >= k) continue;
      }
      const auto r = chunk.row(i);
      std::copy(r.begin(), r.end(), reservoir.begin() + static_cast<std::ptrdiff_t>(slot * d));
    }
  });
  return CentersState(std::move(reservoir), d);
}

CentersState init_kmeanspp(const VectorSet& input, std::size_t k, std::uint64_t seed) {
  SHEESH_EXPECTS(k >= 1 && k <= input.size(), "k must be in [1, |P|]");
  const VectorSet points = input.in_memory() ? input : input.load();
  const std::size_t n = points.size();
  const std::size_t d = points.dim();
  std::mt19937_64 rng(seed);
  std::vector<float> centers;
  centers.reserve(k * d);
  std::vector<char> chosen(n, 0);
  std::vector<double> weight(n, 0.0);

  auto take = [&](std::size_t idx) {
    chosen[idx] = 1;
    const auto r = points.row(idx);
    centers.insert(centers.end(), r.begin(), r.end());
    const auto nn = static_cast<std::ptrdiff_t>(n);
    const bool first = centers.size() == d;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nn; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double dist = kernels::sq_l2(points.row(u).data(), r.data(), d);
      weight[u] = first ? dist : std::min(weight[u], dist);
    }
  };

  take(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  while (centers.size() < k * d) {
    double total = 0.0;
    for (double w : weight) total += w;
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] <= 0.0) continue;
        acc += weight[i];
        pick = i;
        if (acc > r) break;
      }
    } else {
      // every point coincides with a chosen center: fall back to any unused index
      std::size_t remaining = static_cast<std::size_t>(std::count(chosen.begin(), chosen.end(), char{0}));
      std::size_t nth = std::uniform_int_distribution<std::size_t>(0, remaining - 1)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        if (nth-- == 0) {
          pick = i;
          break;
        }
      }
    }
    take(pick);
  }
  return CentersState(std::move(centers), d);
}

}  // namespace sheesh
