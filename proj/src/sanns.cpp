#include "sheesh/sanns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sheesh {

SearchTrace seeded_query(const SearchGraph& g, std::span<const float> q, std::span<const NodeId> seeds,
                         const SearchParams& sp) {
  return hierarchical_search(g, q, seeds, sp);
}

std::vector<float> projection_direction(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

BulkPlan plan_bulk(const Chunk& chunk, const SearchGraph& g, std::uint64_t projection_seed) {
  return plan_bulk(chunk, g, projection_direction(chunk.dim, projection_seed));
}

BulkPlan plan_bulk(const Chunk& chunk, const SearchGraph& g, std::span<const float> direction) {
  SHEESH_EXPECTS(chunk.count > 0, "plan_bulk needs a non-empty chunk");
  SHEESH_EXPECTS(direction.size() == chunk.dim, "projection direction has the wrong dimension");
  BulkPlan plan;
  plan.descents.resize(chunk.count);
  std::vector<double> proj(chunk.count);
  const auto n = static_cast<std::ptrdiff_t>(chunk.count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto row = chunk.row(idx);
    plan.descents[idx] = descend(g, row);
    double dot = 0.0;
    for (std::size_t j = 0; j < chunk.dim; ++j) dot += static_cast<double>(row[j]) * direction[j];
    proj[idx] = dot;
  }

  std::vector<std::size_t> order(chunk.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const NodeId ka = plan.descents[a].node;
    const NodeId kb = plan.descents[b].node;
    if (ka != kb) return ka < kb;
    if (proj[a] != proj[b]) return proj[a] < proj[b];
    return a < b;
  });
  for (std::size_t idx : order) {
    const NodeId key = plan.descents[idx].node;
    if (plan.group_keys.empty() || plan.group_keys.back() != key) {
      plan.group_keys.push_back(key);
      plan.groups.emplace_back();
    }
    plan.groups.back().push_back(idx);
  }
  return plan;
}

void merge_seeds(std::span<const NodeId> first, std::span<const NodeId> second, std::vector<NodeId>& out) {
  out.clear();
  out.reserve(first.size() + second.size());
  for (auto part : {first, second}) {
    for (NodeId id : part) {
      if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
  }
}

std::vector<SearchTrace> run_bulk(const SearchGraph& g, const Chunk& chunk, const SeedView& carried,
                                  const SearchParams& sp, const BulkPlan& plan, bool chain) {
  SHEESH_EXPECTS(plan.descents.size() == chunk.count, "plan was built for a different chunk");
  for (std::size_t i = 0; i < chunk.count; ++i) {
    for (NodeId s : carried[i]) SHEESH_EXPECTS(g.contains(s), "seed is not in the graph");
  }
  std::vector<SearchTrace> out(chunk.count);
  const auto groups = static_cast<std::ptrdiff_t>(plan.groups.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t gi = 0; gi < groups; ++gi) {
    const auto& members = plan.groups[static_cast<std::size_t>(gi)];
    std::vector<NodeId> chained;
    std::vector<NodeId> seeds;
    for (std::size_t idx : members) {
      merge_seeds(chained, carried[idx], seeds);
      out[idx] = search_from_descent(g, chunk.row(idx), plan.descents[idx], seeds, sp);
      if (chain) {
        chained.clear();
        for (const Neighbor& nb : out[idx].results) chained.push_back(nb.id);
      }
    }
  }
  return out;
}

}  // namespace sheesh
