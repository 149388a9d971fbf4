#include "sheesh/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>

#include "visited.hpp"

namespace sheesh {

std::optional<std::string> BuildParams::warning() const {
  if (ef_build < M) {
    return "ef_build (" + std::to_string(ef_build) + ") is smaller than M (" + std::to_string(M) +
           "); insertion searches cannot fill a full neighbor list";
  }
  return std::nullopt;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr int kLevelCap = 31;

}  // namespace

int node_level(NodeId id, std::uint64_t level_seed, std::size_t M) {
  SHEESH_EXPECTS(M >= 2, "M must be at least 2");
  const std::uint64_t h = splitmix64(splitmix64(level_seed) ^ static_cast<std::uint64_t>(id));
  // Uniform on (0, 1].
  const double u = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  const double level = std::floor(-std::log(u) / std::log(static_cast<double>(M)));
  return static_cast<int>(std::min<double>(level, kLevelCap));
}

SearchGraph::SearchGraph(std::size_t dim, std::size_t capacity, const BuildParams& bp)
    : dim_(dim), capacity_(capacity), params_(bp) {
  SHEESH_EXPECTS(dim >= 1, "graph dimension must be positive");
  SHEESH_EXPECTS(capacity < std::size_t{kInvalidNode}, "graph capacity must fit 32-bit node ids");
  SHEESH_EXPECTS(bp.M >= 2, "M must be at least 2");
  SHEESH_EXPECTS(bp.ef_build >= 1, "ef_build must be positive");
  coords_.assign(capacity * dim, 0.0f);
  present_.assign(capacity, 0);
  node_levels_.resize(capacity);
  int top = 0;
  for (std::size_t i = 0; i < capacity; ++i) {
    node_levels_[i] = node_level(static_cast<NodeId>(i), bp.level_seed, bp.M);
    top = std::max(top, node_levels_[i]);
  }
  levels_.resize(static_cast<std::size_t>(top) + 1);
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    Level& level = levels_[l];
    if (l > 0) level.slot.assign(capacity, kInvalidNode);
    for (std::size_t i = 0; i < capacity; ++i) {
      if (node_levels_[i] >= static_cast<int>(l)) {
        if (l > 0) level.slot[i] = static_cast<std::uint32_t>(level.members.size());
        level.members.push_back(static_cast<NodeId>(i));
      }
    }
    level.edges.assign(level.members.size() * bp.M, kInvalidNode);
    level.degree.assign(level.members.size(), 0);
  }
}

std::size_t SearchGraph::row_of(int level, NodeId id) const {
  const Level& lv = levels_[static_cast<std::size_t>(level)];
  if (level == 0) return id;
  const std::uint32_t slot = lv.slot[id];
  SHEESH_EXPECTS(slot != kInvalidNode, "node is not a member of this level");
  return slot;
}

std::span<const NodeId> SearchGraph::neighbors(int level, NodeId id) const {
  SHEESH_EXPECTS(level >= 0 && level < num_levels(), "level out of range");
  SHEESH_EXPECTS(id < capacity_, "node id out of range");
  const Level& lv = levels_[static_cast<std::size_t>(level)];
  const std::size_t row = row_of(level, id);
  return {lv.edges.data() + row * params_.M, lv.degree[row]};
}

void SearchGraph::set_neighbors(int level, NodeId id, std::span<const NodeId> list) {
  Level& lv = levels_[static_cast<std::size_t>(level)];
  const std::size_t row = row_of(level, id);
  SHEESH_EXPECTS(list.size() <= params_.M, "neighbor list exceeds M");
  std::copy(list.begin(), list.end(), lv.edges.begin() + static_cast<std::ptrdiff_t>(row * params_.M));
  lv.degree[row] = static_cast<std::uint32_t>(list.size());
}

void SearchGraph::place(NodeId id, std::span<const float> coords) {
  SHEESH_EXPECTS(coords.size() == dim_, "coordinate dimension mismatch");
  std::copy(coords.begin(), coords.end(), coords_.begin() + static_cast<std::ptrdiff_t>(std::size_t{id} * dim_));
}

bool same_topology(const SearchGraph& a, const SearchGraph& b) {
  if (a.capacity_ != b.capacity_ || a.levels_.size() != b.levels_.size() || a.entry_ != b.entry_ ||
      a.max_level_ != b.max_level_ || a.present_ != b.present_) {
    return false;
  }
  for (std::size_t l = 0; l < a.levels_.size(); ++l) {
    const auto& la = a.levels_[l];
    const auto& lb = b.levels_[l];
    if (la.members != lb.members || la.degree != lb.degree) return false;
    for (std::size_t row = 0; row < la.degree.size(); ++row) {
      const auto off = static_cast<std::ptrdiff_t>(row * a.params_.M);
      if (!std::equal(la.edges.begin() + off, la.edges.begin() + off + la.degree[row], lb.edges.begin() + off))
        return false;
    }
  }
  return true;
}

// Search ---------------------------------------------------------------------

SearchTrace beam_search(const SearchGraph& g, std::span<const float> q, std::span<const NodeId> starts,
                        const SearchParams& sp, int level) {
  SHEESH_EXPECTS(!starts.empty(), "beam_search needs at least one start");
  SHEESH_EXPECTS(sp.beam_width >= 1, "beam width must be positive");
  SHEESH_EXPECTS(sp.result_count >= 1 && sp.result_count <= sp.beam_width, "result_count must be in [1, b]");
  SHEESH_EXPECTS(q.size() == g.dim(), "query dimension mismatch");
  SHEESH_EXPECTS(level >= 0 && level < g.num_levels(), "level out of range");

  const PointsView coords = g.coords();
  const std::size_t b = sp.beam_width;
  auto& visited = detail::thread_visited(g.capacity());
  visited.reset();

  SearchTrace trace;
  // Scratch buffers persist per thread; searches are re-entrant across threads only.
  thread_local std::vector<NodeId> pending;
  thread_local std::vector<float> dists;
  pending.clear();
  for (NodeId s : starts) {
    SHEESH_EXPECTS(g.contains(s), "start node is not in the graph");
    if (level > 0) SHEESH_EXPECTS(g.level_of(s) >= level, "start node is not a member of the search level");
    if (visited.test_and_set(s)) continue;
    pending.push_back(s);
  }
  dists.resize(pending.size());
  kernels::distances_by_id(q.data(), coords, pending, dists, sp.prefetch_ahead);
  trace.visited_count += pending.size();
  trace.distance_count += pending.size();

  // candidates: min-heap; nearest: max-heap holding at most b entries
  thread_local std::vector<Neighbor> candidates;
  thread_local std::vector<Neighbor> nearest;
  candidates.clear();
  nearest.clear();
  auto offer = [&](const Neighbor& nb) {
    candidates.push_back(nb);
    std::push_heap(candidates.begin(), candidates.end(), std::greater<>());
    nearest.push_back(nb);
    std::push_heap(nearest.begin(), nearest.end());
    if (nearest.size() > b) {
      std::pop_heap(nearest.begin(), nearest.end());
      nearest.pop_back();
    }
  };
  for (std::size_t i = 0; i < pending.size(); ++i) offer(Neighbor{pending[i], dists[i]});

  while (!candidates.empty()) {
    const Neighbor c = candidates.front();
    std::pop_heap(candidates.begin(), candidates.end(), std::greater<>());
    candidates.pop_back();
    if (nearest.size() == b && nearest.front() < c && trace.iterations >= sp.min_iterations) break;
    ++trace.iterations;

    pending.clear();
    for (NodeId v : g.neighbors(level, c.id)) {
      if (!visited.test_and_set(v)) pending.push_back(v);
    }
    dists.resize(pending.size());
    kernels::distances_by_id(q.data(), coords, pending, dists, sp.prefetch_ahead);
    trace.visited_count += pending.size();
    trace.distance_count += pending.size();
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const Neighbor nb{pending[i], dists[i]};
      if (nearest.size() < b || nb < nearest.front()) offer(nb);
    }
  }

  std::sort(nearest.begin(), nearest.end());
  trace.results.assign(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(std::min(nearest.size(), sp.result_count)));
  return trace;
}

Descent descend(const SearchGraph& g, std::span<const float> q) {
  SHEESH_EXPECTS(g.size() > 0, "search on an empty graph");
  Descent out{g.entry_point(), 0};
  SearchParams greedy;
  greedy.beam_width = 1;
  greedy.result_count = 1;
  for (int level = g.max_level(); level >= 1; --level) {
    const NodeId start = out.node;
    const SearchTrace t = beam_search(g, q, {&start, 1}, greedy, level);
    out.node = t.results.front().id;
    out.distance_count += t.distance_count;
  }
  return out;
}

SearchTrace search_from_descent(const SearchGraph& g, std::span<const float> q, const Descent& descent,
                                std::span<const NodeId> seeds, const SearchParams& sp) {
  thread_local std::vector<NodeId> starts;
  starts.clear();
  starts.push_back(descent.node);
  starts.insert(starts.end(), seeds.begin(), seeds.end());
  SearchTrace t = beam_search(g, q, starts, sp, 0);
  t.distance_count += descent.distance_count;
  t.descent_node = descent.node;
  return t;
}

SearchTrace hierarchical_search(const SearchGraph& g, std::span<const float> q, std::span<const NodeId> seeds,
                                const SearchParams& sp) {
  for (NodeId s : seeds) SHEESH_EXPECTS(g.contains(s), "seed is not in the graph");
  return search_from_descent(g, q, descend(g, q), seeds, sp);
}

std::size_t reachable_count(const SearchGraph& g) {
  if (g.size() == 0) return 0;
  std::vector<std::uint8_t> seen(g.capacity(), 0);
  std::vector<NodeId> stack{g.entry_point()};
  seen[g.entry_point()] = 1;
  std::size_t count = 0;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    ++count;
    for (NodeId v : g.neighbors(0, u)) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return count;
}

// Snapshot -------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'H', 'G', 'R'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated graph snapshot");
  return v;
}

}  // namespace

void SearchGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put(out, kSnapshotVersion);
  put<std::uint64_t>(out, dim_);
  put<std::uint64_t>(out, capacity_);
  put<std::uint64_t>(out, params_.ef_build);
  put<std::uint64_t>(out, params_.M);
  put<std::uint64_t>(out, params_.level_seed);
  put<std::uint32_t>(out, entry_);
  put<std::int32_t>(out, max_level_);
  out.write(reinterpret_cast<const char*>(coords_.data()), static_cast<std::streamsize>(coords_.size() * 4));
  out.write(reinterpret_cast<const char*>(present_.data()), static_cast<std::streamsize>(present_.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(levels_.size()));
  for (const Level& lv : levels_) {
    out.write(reinterpret_cast<const char*>(lv.degree.data()), static_cast<std::streamsize>(lv.degree.size() * 4));
    out.write(reinterpret_cast<const char*>(lv.edges.data()), static_cast<std::streamsize>(lv.edges.size() * 4));
  }
  if (!out) throw IoError("write failed on " + path.string());
}

SearchGraph SearchGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a graph snapshot", 0);
  if (get<std::uint32_t>(in) != kSnapshotVersion) throw FormatError("unsupported snapshot version", 4);
  const auto dim = get<std::uint64_t>(in);
  const auto capacity = get<std::uint64_t>(in);
  BuildParams bp;
  bp.ef_build = get<std::uint64_t>(in);
  bp.M = get<std::uint64_t>(in);
  bp.level_seed = get<std::uint64_t>(in);
  SearchGraph g(dim, capacity, bp);
  g.entry_ = get<std::uint32_t>(in);
  g.max_level_ = get<std::int32_t>(in);
  if (!in.read(reinterpret_cast<char*>(g.coords_.data()), static_cast<std::streamsize>(g.coords_.size() * 4)) ||
      !in.read(reinterpret_cast<char*>(g.present_.data()), static_cast<std::streamsize>(g.present_.size())))
    throw IoError("truncated graph snapshot");
  if (get<std::uint32_t>(in) != g.levels_.size()) throw FormatError("level count mismatch", 0);
  for (Level& lv : g.levels_) {
    if (!in.read(reinterpret_cast<char*>(lv.degree.data()), static_cast<std::streamsize>(lv.degree.size() * 4)) ||
        !in.read(reinterpret_cast<char*>(lv.edges.data()), static_cast<std::streamsize>(lv.edges.size() * 4)))
      throw IoError("truncated graph snapshot");
  }
  g.inserted_ = static_cast<std::size_t>(std::count(g.present_.begin(), g.present_.end(), 1));
  return g;
}

}  // namespace sheesh
