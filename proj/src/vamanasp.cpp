#include "sheesh/vamanasp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sheesh/sanns.hpp"

namespace sheesh::vamana {

double distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

std::size_t AlphaGraph::max_degree() const {
  std::size_t m = 0;
  for (const auto& a : adjacency_) m = std::max(m, a.size());
  return m;
}

AlphaGraph build_slow(const PointsView& points, const AlphaParams& ap) {
  SHEESH_EXPECTS(ap.alpha > 1.0, "alpha must exceed 1");
  SHEESH_EXPECTS(ap.epsilon > 0.0, "epsilon must be positive");
  SHEESH_EXPECTS(points.rows >= 1, "empty point set");
  SHEESH_EXPECTS(points.rows <= ap.max_points, "too many points for the cubic construction");
  const std::size_t n = points.rows;
  AlphaGraph g;
  g.dim_ = points.dim;
  g.params_ = ap;
  g.points_.assign(points.data, points.data + n * points.dim);
  g.adjacency_.resize(n);

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4) reduction(min : dmin) reduction(max : dmax)
  for (std::ptrdiff_t ui = 0; ui < nn; ++ui) {
    const auto u = static_cast<std::size_t>(ui);
    std::vector<std::pair<double, NodeId>> cand;
    cand.reserve(n - 1);
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u) continue;
      const double d = distance(points.row(u), points.row(v));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
      cand.emplace_back(d, static_cast<NodeId>(v));
    }
    std::sort(cand.begin(), cand.end());
    auto& kept = g.adjacency_[u];
    for (const auto& [duv, v] : cand) {
      bool pruned = false;
      for (NodeId w : kept) {
        if (ap.alpha * distance(points.row(w), points.row(v)) <= duv) {
          pruned = true;
          break;
        }
      }
      if (!pruned) kept.push_back(v);
    }
  }
  SHEESH_EXPECTS(n == 1 || dmin > 0.0, "duplicate points: aspect ratio undefined");
  g.aspect_ratio_ = n == 1 ? 1.0 : dmax / dmin;
  return g;
}

namespace {

// Steepest descent; `on_visit` sees each expanded node and its distance.
template <typename OnVisit>
GreedyResult descend(const AlphaGraph& g, std::span<const float> q, NodeId start, OnVisit&& on_visit) {
  SHEESH_EXPECTS(start < g.size(), "start node is not in the graph");
  SHEESH_EXPECTS(q.size() == g.dim(), "query has the wrong dimension");
  GreedyResult r{start, distance(g.point(start), q), 0, 1};
  for (;;) {
    ++r.visit_count;
    on_visit(r.best, r.distance, r.visit_count);
    NodeId next = r.best;
    double next_d = r.distance;
    r.distance_count += g.neighbors(r.best).size();
    for (NodeId v : g.neighbors(r.best)) {
      const double d = distance(g.point(v), q);
      if (d < next_d || (d == next_d && v < next)) {
        next = v;
        next_d = d;
      }
    }
    if (next == r.best) return r;
    r.best = next;
    r.distance = next_d;
  }
}

}  // namespace

GreedyResult greedy_search_counted(const AlphaGraph& g, std::span<const float> q, NodeId start) {
  return descend(g, q, start, [](NodeId, double, std::size_t) {});
}

std::size_t visit_bound(double alpha, double delta, double epsilon) {
  const double v = std::log((1.0 + delta) / epsilon) / std::log(alpha);
  if (!(v > 0.0)) return 0;
  // guard against log rounding pushing an exact power just above an integer
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-12) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(v));
}

SeededResult seeded_greedy_search(const AlphaGraph& g, std::span<const float> q, NodeId seed) {
  SHEESH_EXPECTS(seed < g.size(), "seed is not in the graph");
  double nn = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < g.size(); ++u) nn = std::min(nn, distance(g.point(static_cast<NodeId>(u)), q));

  SeededResult out;
  const double ratio = g.guarantee_ratio();
  const double seed_d = distance(g.point(seed), q);
  out.delta = nn > 0.0 ? seed_d / nn - 1.0 : (seed_d > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  out.visit_bound = visit_bound(g.params().alpha, out.delta, g.params().epsilon);
  out.search = descend(g, q, seed, [&](NodeId, double d, std::size_t visit) {
    if (out.visits_to_guarantee == 0 && d <= ratio * nn) out.visits_to_guarantee = visit;
  });
  out.guarantee_met = out.visits_to_guarantee != 0 && out.visits_to_guarantee <= out.visit_bound + 1;
  return out;
}

ProjectionIndex::ProjectionIndex(const PointsView& points, std::uint64_t seed) {
  SHEESH_EXPECTS(points.rows >= 1, "empty point set");
  const auto dir = projection_direction(points.dim, seed);
  direction_.assign(dir.begin(), dir.end());
  sorted_.reserve(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) sorted_.emplace_back(project(points.row(i)), static_cast<NodeId>(i));
  std::sort(sorted_.begin(), sorted_.end());
}

double ProjectionIndex::project(std::span<const float> v) const {
  SHEESH_EXPECTS(v.size() == direction_.size(), "vector has the wrong dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<double>(v[i]) * direction_[i];
  return s;
}

NodeId ProjectionIndex::seed_for(std::span<const float> q) const {
  const double t = project(q);
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(t, NodeId{0}));
  if (it == sorted_.end()) return sorted_.back().second;
  if (it == sorted_.begin()) return it->second;
  const auto prev = std::prev(it);
  return (t - prev->first) <= (it->first - t) ? prev->second : it->second;
}

NodeId projection_seed(const PointsView& points, std::span<const float> q, std::uint64_t seed) {
  return ProjectionIndex(points, seed).seed_for(q);
}

}  // namespace sheesh::vamana
