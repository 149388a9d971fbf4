#include "sheesh/kmeans.hpp"

#include <algorithm>
#include <cmath>

#include "kmeans_internal.hpp"

namespace sheesh {

CentersState::CentersState(std::vector<float> coords, std::size_t dim_)
    : centers(std::move(coords)), k(dim_ == 0 ? 0 : centers.size() / dim_), dim(dim_) {
  SHEESH_EXPECTS(dim_ >= 1 && centers.size() % dim_ == 0, "center buffer does not match the dimension");
}

MultiAssignment::MultiAssignment(std::size_t n, std::size_t m)
    : m_(m), ids_(n * m, kInvalidNode), dists_(n * m, 0.0f), counts_(n, 0) {
  SHEESH_EXPECTS(m >= 1, "assignment width must be positive");
}

NodeId MultiAssignment::assigned(std::size_t i) const {
  SHEESH_EXPECTS(i < size() && counts_[i] > 0, "point has no assignment");
  return ids_[i * m_];
}

float MultiAssignment::assigned_distance(std::size_t i) const {
  SHEESH_EXPECTS(i < size() && counts_[i] > 0, "point has no assignment");
  return dists_[i * m_];
}

void MultiAssignment::set(std::size_t i, std::span<const Neighbor> list) {
  const std::size_t n = std::min(list.size(), m_);
  for (std::size_t j = 0; j < n; ++j) {
    ids_[i * m_ + j] = list[j].id;
    dists_[i * m_ + j] = list[j].distance;
  }
  counts_[i] = static_cast<std::uint32_t>(n);
}

SeedView MultiAssignment::seeds(std::size_t start) const {
  if (empty()) return {};
  return SeedView{ids_.data() + start * m_, counts_.data() + start, m_};
}

namespace detail {

Accumulator::Accumulator(std::size_t k, std::size_t dim)
    : k_(k), dim_(dim), sums_(k * dim, 0.0), sumsq_(k, 0.0), counts_(k, 0) {}

void Accumulator::add(std::span<const float> p, NodeId c) {
  double* s = sums_.data() + std::size_t{c} * dim_;
  double sq = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double v = p[j];
    s[j] += v;
    sq += v * v;
  }
  sumsq_[c] += sq;
  ++counts_[c];
}

Accumulator::Outcome Accumulator::finish(const CentersState& old) const {
  Outcome out;
  out.centers = old;
  double score = 0.0;
  double movement = 0.0;
  for (std::size_t c = 0; c < k_; ++c) {
    float* dst = out.centers.centers.data() + c * dim_;
    if (counts_[c] == 0) continue;  // empty cluster keeps its coordinates
    const double n = static_cast<double>(counts_[c]);
    const double* s = sums_.data() + c * dim_;
    double sum_norm = 0.0;
    double rounding = 0.0;
    double moved = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double mean = s[j] / n;
      const float rounded = static_cast<float>(mean);
      sum_norm += s[j] * s[j];
      rounding += (mean - rounded) * (mean - rounded);
      moved += (static_cast<double>(rounded) - dst[j]) * (static_cast<double>(rounded) - dst[j]);
      dst[j] = rounded;
    }
    // sum ||p - c||^2 = sum ||p||^2 - ||S||^2 / n + n ||mean - c||^2 for the stored (rounded) c
    score += std::max(0.0, sumsq_[c] - sum_norm / n) + n * rounding;
    movement += std::sqrt(moved);
  }
  out.score = score;
  out.movement = k_ == 0 ? 0.0 : movement / static_cast<double>(k_);
  return out;
}

void apply_guard(std::vector<Neighbor>& list, NodeId previous, float previous_distance, std::size_t width) {
  if (!list.empty() && list.front().distance < previous_distance) return;
  list.erase(std::remove_if(list.begin(), list.end(), [&](const Neighbor& nb) { return nb.id == previous; }),
             list.end());
  list.insert(list.begin(), Neighbor{previous, previous_distance});
  if (list.size() > width) list.resize(width);
}

IterationResult reassign_pass(const VectorSet& points, const CentersState& centers, std::size_t width,
                              const MultiAssignment* guard, const MultiAssignment* previous,
                              std::size_t chunk_size, const ChunkAssigner& assign) {
  SHEESH_EXPECTS(points.dim() == centers.dim, "points and centers differ in dimension");
  IterationResult result;
  result.assignment = MultiAssignment(points.size(), width);
  Accumulator acc(centers.k, centers.dim);
  std::size_t distances = 0;
  std::size_t reassigned = 0;
  const PointsView cv = centers.view();
  std::vector<std::vector<Neighbor>> lists;

  stream_chunks(points, chunk_size ? chunk_size : default_chunk_size(centers.k), [&](const Chunk& chunk) {
    lists.assign(chunk.count, {});
    distances += assign(chunk, lists);

    if (guard != nullptr && !guard->empty()) {
      const auto n = static_cast<std::ptrdiff_t>(chunk.count);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto local = static_cast<std::size_t>(i);
        const std::size_t gi = chunk.start_index + local;
        if (!guard->has(gi)) continue;
        const NodeId prev = guard->assigned(gi);
        const float d = kernels::sq_l2(chunk.row(local).data(), cv.ptr(prev), cv.dim);
        apply_guard(lists[local], prev, d, width);
      }
      for (std::size_t i = 0; i < chunk.count; ++i) distances += guard->has(chunk.start_index + i) ? 1 : 0;
    }

    for (std::size_t i = 0; i < chunk.count; ++i) {
      const std::size_t gi = chunk.start_index + i;
      result.assignment.set(gi, lists[i]);
      const NodeId c = lists[i].front().id;
      acc.add(chunk.row(i), c);
      if (previous == nullptr || !previous->has(gi) || previous->assigned(gi) != c) ++reassigned;
    }
  });

  auto outcome = acc.finish(centers);
  result.centers = std::move(outcome.centers);
  result.centers.iteration = centers.iteration + 1;
  result.stats.iteration = centers.iteration;
  result.stats.score = outcome.score;
  result.stats.avg_center_movement = outcome.movement;
  result.stats.reassigned_count = reassigned;
  result.stats.distance_count = distances;
  return result;
}

std::size_t assign_exact_chunk(const Chunk& chunk, const PointsView& centers,
                               std::vector<std::vector<Neighbor>>& lists) {
  const auto n = static_cast<std::ptrdiff_t>(chunk.count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto local = static_cast<std::size_t>(i);
    const float* p = chunk.row(local).data();
    Neighbor best{0, kernels::sq_l2(p, centers.ptr(0), centers.dim)};
    for (std::size_t c = 1; c < centers.rows; ++c) {
      const float d = kernels::sq_l2(p, centers.ptr(c), centers.dim);
      if (d < best.distance) best = Neighbor{static_cast<NodeId>(c), d};
    }
    lists[local].assign(1, best);
  }
  return chunk.count * centers.rows;
}

}  // namespace detail

double score(const VectorSet& points, const MultiAssignment& assignment, const CentersState& centers,
             std::size_t chunk_size) {
  SHEESH_EXPECTS(assignment.size() == points.size(), "assignment does not cover the point set");
  SHEESH_EXPECTS(points.dim() == centers.dim, "points and centers differ in dimension");
  double total = 0.0;
  std::vector<double> per_point;
  stream_chunks(points, chunk_size, [&](const Chunk& chunk) {
    per_point.assign(chunk.count, 0.0);
    for (std::size_t i = 0; i < chunk.count; ++i) {
      SHEESH_EXPECTS(assignment.has(chunk.start_index + i), "point has no assignment");
    }
    const auto n = static_cast<std::ptrdiff_t>(chunk.count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto local = static_cast<std::size_t>(i);
      const NodeId c = assignment.assigned(chunk.start_index + local);
      per_point[local] = kernels::sq_l2(chunk.row(local).data(), centers.view().ptr(c), centers.dim);
    }
    for (double v : per_point) total += v;
  });
  return total;
}

double exact_score(const VectorSet& points, const CentersState& centers, std::size_t chunk_size) {
  double total = 0.0;
  std::vector<std::vector<Neighbor>> lists;
  stream_chunks(points, chunk_size, [&](const Chunk& chunk) {
    lists.assign(chunk.count, {});
    detail::assign_exact_chunk(chunk, centers.view(), lists);
    for (const auto& l : lists) total += l.front().distance;
  });
  return total;
}

IterationResult lloyd_exact_iteration(const VectorSet& points, const CentersState& centers,
                                      const MultiAssignment* previous, std::size_t chunk_size) {
  SHEESH_EXPECTS(centers.k >= 1, "need at least one center");
  const PointsView cv = centers.view();
  return detail::reassign_pass(points, centers, 1, nullptr, previous, chunk_size,
                               [&](const Chunk& chunk, std::vector<std::vector<Neighbor>>& lists) {
                                 return detail::assign_exact_chunk(chunk, cv, lists);
                               });
}

GraphIterationResult blackbox_iteration(const VectorSet& points, const CentersState& centers, const BuildParams& bp,
                                        const SearchParams& sp, bool avoid_regress, const MultiAssignment* previous,
                                        std::size_t chunk_size) {
  SHEESH_EXPECTS(centers.k >= 1, "need at least one center");
  SearchGraph graph = bulk_build(centers.view(), bp);
  auto r = detail::reassign_pass(
      points, centers, sp.result_count, avoid_regress ? previous : nullptr, previous, chunk_size,
      [&](const Chunk& chunk, std::vector<std::vector<Neighbor>>& lists) {
        std::vector<std::size_t> counts(chunk.count);
        const auto n = static_cast<std::ptrdiff_t>(chunk.count);
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
          const auto local = static_cast<std::size_t>(i);
          SearchTrace t = hierarchical_search(graph, chunk.row(local), {}, sp);
          counts[local] = t.distance_count;
          lists[local] = std::move(t.results);
        }
        std::size_t total = 0;
        for (auto c : counts) total += c;
        return total;
      });
  return {std::move(r.centers), std::move(r.assignment), r.stats, std::move(graph)};
}

GraphIterationResult sheesh_iteration(const VectorSet& points, const CentersState& centers,
                                      const MultiAssignment& seeds, const SearchGraph* previous_graph,
                                      const SheeshOptions& options, const MultiAssignment* previous) {
  SHEESH_EXPECTS(centers.k >= 1, "need at least one center");
  SHEESH_EXPECTS(seeds.empty() || seeds.size() == points.size(), "seed assignment does not cover the point set");
  SearchGraph graph = (previous_graph != nullptr && options.use_rebuilds)
                          ? rebuild_from_previous(*previous_graph, centers.view(), options.build)
                          : bulk_build(centers.view(), options.build);

  SearchParams sp = options.search;
  if (!options.enable_min_iter) sp.min_iterations = 0;
  const std::vector<float> direction =
      projection_direction(centers.dim, options.projection_seed + 0x9e3779b97f4a7c15ULL * (centers.iteration + 1));
  const bool carry = options.enable_seeds && !seeds.empty();
  const MultiAssignment* guard = (options.avoid_regress && !seeds.empty()) ? &seeds : nullptr;

  auto r = detail::reassign_pass(
      points, centers, sp.result_count, guard, previous != nullptr ? previous : (seeds.empty() ? nullptr : &seeds),
      options.chunk_size, [&](const Chunk& chunk, std::vector<std::vector<Neighbor>>& lists) {
        const SeedView carried = carry ? seeds.seeds(chunk.start_index) : SeedView{};
        std::vector<SearchTrace> traces;
        if (options.enable_bulk) {
          const BulkPlan plan = plan_bulk(chunk, graph, direction);
          traces = run_bulk(graph, chunk, carried, sp, plan, true);
        } else {
          traces.resize(chunk.count);
          const auto n = static_cast<std::ptrdiff_t>(chunk.count);
#pragma omp parallel for schedule(dynamic, 64)
          for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto local = static_cast<std::size_t>(i);
            traces[local] = seeded_query(graph, chunk.row(local), carried[local], sp);
          }
        }
        std::size_t total = 0;
        for (std::size_t i = 0; i < chunk.count; ++i) {
          total += traces[i].distance_count;
          lists[i] = std::move(traces[i].results);
        }
        return total;
      });
  return {std::move(r.centers), std::move(r.assignment), r.stats, std::move(graph)};
}

}  // namespace sheesh
