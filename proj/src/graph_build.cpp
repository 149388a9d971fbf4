#include <algorithm>
#include <map>
#include <numeric>

#include "sheesh/graph.hpp"

namespace sheesh {

std::vector<NodeId> select_neighbors(const PointsView& coords, std::span<const Neighbor> candidates,
                                     std::size_t M) {
  std::vector<NodeId> kept;
  kept.reserve(std::min(M, candidates.size()));
  for (const Neighbor& c : candidates) {
    if (kept.size() >= M) break;
    const float* cp = coords.ptr(c.id);
    bool good = true;
    for (NodeId r : kept) {
      if (kernels::sq_l2(cp, coords.ptr(r), coords.dim) < c.distance) {
        good = false;
        break;
      }
    }
    if (good) kept.push_back(c.id);
  }
  return kept;
}

namespace {

// Per-level neighbor choices for a node at `node_lvl` with coordinates `q`,
// searched against the linked part of `g`. Levels above g.max_level() stay empty.
std::vector<std::vector<NodeId>> plan_links(const SearchGraph& g, std::span<const float> q, int node_lvl,
                                            std::size_t ef_build) {
  std::vector<std::vector<NodeId>> links(static_cast<std::size_t>(node_lvl) + 1);
  if (g.size() == 0) return links;

  NodeId cur = g.entry_point();
  SearchParams greedy;
  greedy.beam_width = 1;
  greedy.result_count = 1;
  for (int l = g.max_level(); l > node_lvl; --l) {
    cur = beam_search(g, q, {&cur, 1}, greedy, l).results.front().id;
  }

  SearchParams wide;
  wide.beam_width = ef_build;
  wide.result_count = ef_build;
  std::vector<NodeId> starts{cur};
  for (int l = std::min(node_lvl, g.max_level()); l >= 0; --l) {
    const SearchTrace found = beam_search(g, q, starts, wide, l);
    links[static_cast<std::size_t>(l)] = select_neighbors(g.coords(), found.results, g.params().M);
    starts.clear();
    for (const Neighbor& nb : found.results) starts.push_back(nb.id);
  }
  return links;
}

// Sorted (distance to `base`, id) candidate list over `ids`, excluding base.
std::vector<Neighbor> rank_against(const SearchGraph& g, NodeId base, std::span<const NodeId> ids) {
  const PointsView coords = g.coords();
  std::vector<Neighbor> out;
  out.reserve(ids.size());
  for (NodeId v : ids) {
    if (v == base) continue;
    out.push_back({v, kernels::sq_l2(coords.ptr(base), coords.ptr(v), coords.dim)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.id == b.id; }),
            out.end());
  return out;
}

}  // namespace

class GraphBuilder {
 public:
  // Adds `offers` to v's list at `level`, re-pruning with the selection
  // heuristic when the degree cap would be exceeded.
  static void link_back(SearchGraph& g, int level, NodeId v, std::span<const NodeId> offers) {
  const auto current = g.neighbors(level, v);
  std::vector<NodeId> merged(current.begin(), current.end());
  for (NodeId u : offers) {
    if (u != v && std::find(merged.begin(), merged.end(), u) == merged.end()) merged.push_back(u);
  }
  if (merged.size() > g.params().M) {
    const std::vector<Neighbor> ranked = rank_against(g, v, merged);
    merged = select_neighbors(g.coords(), ranked, g.params().M);
  }
  g.set_neighbors(level, v, merged);
  }

  // Links every member unreachable from the entry point at `level` from its
  // nearest reachable member that still has a free slot. Only when every
  // reachable member is full does an edge get replaced, which may strand
  // another node, so that case restarts the traversal.
  static void repair(SearchGraph& g, int level) {
    const auto& members = g.members(level);
    if (members.size() < 2 || g.entry_point() == kInvalidNode) return;
    const PointsView coords = g.coords();
    const std::size_t M = g.params().M;
    std::vector<std::uint8_t> seen(g.capacity(), 0);
    std::vector<NodeId> stack;
    auto flood = [&](NodeId from) {
      seen[from] = 1;
      stack.push_back(from);
      while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : g.neighbors(level, u)) {
          if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
        }
      }
    };
    flood(g.entry_point());
    std::size_t restarts = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const NodeId u = members[i];
      if (seen[u] || !g.contains(u)) continue;
      Neighbor open{kInvalidNode, 0.0f}, any{kInvalidNode, 0.0f};
      for (NodeId v : members) {
        if (!seen[v] || !g.contains(v)) continue;
        const Neighbor cand{v, kernels::sq_l2(coords.ptr(u), coords.ptr(v), coords.dim)};
        if (any.id == kInvalidNode || cand < any) any = cand;
        if (g.neighbors(level, v).size() < M && (open.id == kInvalidNode || cand < open)) open = cand;
      }
      if (open.id != kInvalidNode) {
        std::vector<NodeId> list(g.neighbors(level, open.id).begin(), g.neighbors(level, open.id).end());
        list.push_back(u);
        g.set_neighbors(level, open.id, list);
        flood(u);
      } else if (restarts++ < members.size()) {
        auto list = rank_against(g, any.id, g.neighbors(level, any.id));
        list.back() = {u, any.distance};
        std::vector<NodeId> ids;
        for (const Neighbor& nb : list) ids.push_back(nb.id);
        g.set_neighbors(level, any.id, ids);
        std::fill(seen.begin(), seen.end(), 0);
        flood(g.entry_point());
        i = static_cast<std::size_t>(-1);
      }
    }
  }
};

void repair_connectivity(SearchGraph& g) {
  for (int l = 0; l <= g.max_level(); ++l) GraphBuilder::repair(g, l);
}

void insert(SearchGraph& g, NodeId id, std::span<const float> coords, const BuildParams& bp) {
  SHEESH_EXPECTS(id < g.capacity(), "node id exceeds graph capacity");
  SHEESH_EXPECTS(!g.contains(id), "node already inserted");
  SHEESH_EXPECTS(bp.M == g.params_.M && bp.level_seed == g.params_.level_seed,
                 "build parameters must match the graph's M and level_seed");
  g.place(id, coords);
  const int lvl = g.level_of(id);
  const auto links = plan_links(g, coords, lvl, bp.ef_build);
  for (int l = 0; l <= std::min(lvl, g.max_level()); ++l) {
    const auto& list = links[static_cast<std::size_t>(l)];
    if (g.size() == 0) break;
    g.set_neighbors(l, id, list);
    for (NodeId v : list) GraphBuilder::link_back(g, l, v, {&id, 1});
  }
  g.present_[id] = 1;
  if (g.inserted_ == 0 || lvl > g.max_level_) {
    g.entry_ = id;
    g.max_level_ = lvl;
  }
  ++g.inserted_;
}

SearchGraph bulk_build(const PointsView& points, const BuildParams& bp) {
  SHEESH_EXPECTS(points.rows >= 1, "bulk_build needs at least one point");
  SearchGraph g(points.dim, points.rows, bp);
  for (std::size_t i = 0; i < points.rows; ++i) g.place(static_cast<NodeId>(i), points.row(i));

  // Highest levels first, so upper layers are complete before lower nodes search them.
  std::vector<NodeId> order(points.rows);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.level_of(a) > g.level_of(b); });

  const NodeId first = order.front();
  g.present_[first] = 1;
  g.entry_ = first;
  g.max_level_ = g.level_of(first);
  g.inserted_ = 1;

  constexpr double kBatchFraction = 0.1;
  constexpr std::size_t kMaxBatch = 8192;
  std::size_t pos = 1;
  while (pos < order.size()) {
    const std::size_t batch =
        std::clamp<std::size_t>(static_cast<std::size_t>(static_cast<double>(pos) * kBatchFraction), 1, kMaxBatch);
    const std::size_t end = std::min(order.size(), pos + batch);
    const auto span_len = static_cast<std::ptrdiff_t>(end - pos);

    std::vector<std::vector<std::vector<NodeId>>> links(end - pos);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < span_len; ++i) {
      const NodeId u = order[pos + static_cast<std::size_t>(i)];
      links[static_cast<std::size_t>(i)] = plan_links(g, g.coord(u), g.level_of(u), bp.ef_build);
    }

    std::map<std::pair<int, NodeId>, std::vector<NodeId>> offers;
    for (std::size_t i = 0; i < end - pos; ++i) {
      const NodeId u = order[pos + i];
      const auto& per_level = links[i];
      for (std::size_t l = 0; l < per_level.size(); ++l) {
        g.set_neighbors(static_cast<int>(l), u, per_level[l]);
        for (NodeId v : per_level[l]) offers[{static_cast<int>(l), v}].push_back(u);
      }
      g.present_[u] = 1;
    }
    g.inserted_ = end;

    std::vector<std::pair<std::pair<int, NodeId>, std::vector<NodeId>>> work(offers.begin(), offers.end());
    const auto work_len = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < work_len; ++i) {
      const auto& [key, from] = work[static_cast<std::size_t>(i)];
      GraphBuilder::link_back(g, key.first, key.second, from);
    }
    pos = end;
  }
  repair_connectivity(g);
  return g;
}

SearchGraph rebuild_from_previous(const SearchGraph& prev, const PointsView& new_coords, const BuildParams& bp) {
  SHEESH_EXPECTS(new_coords.rows == prev.capacity() && new_coords.dim == prev.dim(),
                 "new coordinates must cover the previous graph's node set");
  SHEESH_EXPECTS(prev.size() == prev.capacity(), "previous graph must contain every node");
  SHEESH_EXPECTS(bp.M == prev.params().M && bp.level_seed == prev.params().level_seed,
                 "rebuild must keep M and level_seed");

  SearchGraph g = prev;
  g.params_.ef_build = bp.ef_build;
  for (std::size_t i = 0; i < new_coords.rows; ++i) g.place(static_cast<NodeId>(i), new_coords.row(i));

  const PointsView old_pts = prev.coords();
  const PointsView new_pts = g.coords();
  SearchParams wide;
  wide.beam_width = bp.ef_build;
  wide.result_count = bp.ef_build;

  for (int l = 0; l < g.num_levels(); ++l) {
    const auto& members = g.members(l);
    const auto n = static_cast<std::ptrdiff_t>(members.size());
    if (n < 2) continue;

    std::vector<std::uint8_t> dirty(members.size(), 0);
    std::vector<std::vector<NodeId>> fresh(members.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const NodeId u = members[static_cast<std::size_t>(i)];
      const auto old_list = prev.neighbors(l, u);
      bool moved = false;
      for (NodeId v : old_list) {
        if (kernels::sq_l2(new_pts.ptr(u), new_pts.ptr(v), new_pts.dim) !=
            kernels::sq_l2(old_pts.ptr(u), old_pts.ptr(v), old_pts.dim)) {
          moved = true;
          break;
        }
      }
      if (!moved || old_list.empty()) continue;
      dirty[static_cast<std::size_t>(i)] = 1;
      const SearchTrace found = beam_search(g, g.coord(u), old_list, wide, l);
      std::vector<NodeId> pool;
      pool.reserve(found.results.size() + old_list.size());
      for (const Neighbor& nb : found.results) pool.push_back(nb.id);
      pool.insert(pool.end(), old_list.begin(), old_list.end());
      fresh[static_cast<std::size_t>(i)] = select_neighbors(new_pts, rank_against(g, u, pool), bp.M);
    }

    std::map<NodeId, std::vector<NodeId>> offers;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (dirty[i]) g.set_neighbors(l, members[i], fresh[i]);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!dirty[i]) continue;
      const NodeId u = members[i];
      for (NodeId v : fresh[i]) {
        const auto back = g.neighbors(l, v);
        if (std::find(back.begin(), back.end(), u) == back.end()) offers[v].push_back(u);
      }
    }
    std::vector<std::pair<NodeId, std::vector<NodeId>>> work(offers.begin(), offers.end());
    const auto work_len = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < work_len; ++i) {
      const auto& [v, from] = work[static_cast<std::size_t>(i)];
      GraphBuilder::link_back(g, l, v, from);
    }
  }
  repair_connectivity(g);
  return g;
}

}  // namespace sheesh
