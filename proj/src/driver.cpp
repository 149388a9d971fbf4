#include <chrono>
#include <optional>
#include <string>

#include "sheesh/kmeans.hpp"

namespace sheesh {

const char* to_string(Engine e) {
  switch (e) {
    case Engine::lloyd: return "lloyd";
    case Engine::blackbox: return "blackbox";
    case Engine::sheesh: return "sheesh";
  }
  return "?";
}

const char* to_string(InitMethod m) { return m == InitMethod::uniform ? "uniform" : "kmeanspp"; }

void RunConfig::validate(std::optional<std::size_t> n_points) const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (format != "fvecs" && format != "bvecs") fail("format must be fvecs or bvecs, got '" + format + "'");
  if (k == 0) fail("k must be positive");
  if (n_points && k > *n_points) {
    fail("k = " + std::to_string(k) + " exceeds the number of points (" + std::to_string(*n_points) + ")");
  }
  if (!(time_limit_seconds > 0.0)) fail("time-limit-seconds must be positive");
  if (threads == 0) fail("threads must be positive");
  if (M < 2) fail("M must be at least 2");
  if (ef_build == 0) fail("ef-build must be positive");
  if (num_prev_assignments == 0) fail("num-prev-assignments must be positive");
  if (effective_ef_search() < num_prev_assignments) {
    fail("ef-search must be at least num-prev-assignments");
  }
  if (k > kInvalidNode) fail("k is too large");
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<IterationStats> run_clustering(const RunConfig& config, const VectorSet& points,
                                           const IterationCallback& on_iteration, CentersState* final_centers) {
  config.validate(points.size());
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  double excluded = 0.0;  // seconds spent in verification-only scoring
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count() - excluded; };

  const std::size_t chunk = config.effective_chunk_size();
  BuildParams bp;
  bp.ef_build = config.ef_build;
  bp.M = config.M;
  bp.level_seed = mix(config.seed ^ 0x1e7e15eedULL);
  SearchParams sp;
  sp.beam_width = config.effective_ef_search();
  sp.result_count = config.num_prev_assignments;
  sp.min_iterations = 0;

  SheeshOptions opts;
  opts.build = bp;
  opts.search = sp;
  opts.search.min_iterations = config.min_iterations;
  opts.use_rebuilds = config.use_rebuilds;
  opts.enable_seeds = config.enable_seeds;
  opts.enable_bulk = config.enable_bulk;
  opts.enable_min_iter = config.enable_min_iter;
  opts.avoid_regress = config.avoid_regress;
  opts.projection_seed = mix(config.seed ^ 0x9a0cULL);
  opts.chunk_size = chunk;

  CentersState centers = config.init == InitMethod::uniform ? init_uniform(points, config.k, config.seed)
                                                            : init_kmeanspp(points, config.k, config.seed);

  std::vector<IterationStats> history;
  MultiAssignment previous;  // assignment of the last pass (seed lists for sheesh)
  std::optional<SearchGraph> graph;
  for (std::size_t it = 0; it <= config.max_iterations; ++it) {
    const MultiAssignment* prev = previous.empty() ? nullptr : &previous;
    IterationStats stats;
    CentersState next;
    switch (config.engine) {
      case Engine::lloyd: {
        auto r = lloyd_exact_iteration(points, centers, prev, chunk);
        next = std::move(r.centers);
        previous = std::move(r.assignment);
        stats = r.stats;
        break;
      }
      case Engine::blackbox: {
        auto r = blackbox_iteration(points, centers, bp, sp, config.avoid_regress, prev, chunk);
        next = std::move(r.centers);
        previous = std::move(r.assignment);
        stats = r.stats;
        break;
      }
      case Engine::sheesh: {
        auto r = sheesh_iteration(points, centers, previous, graph ? &*graph : nullptr, opts);
        next = std::move(r.centers);
        previous = std::move(r.assignment);
        graph = std::move(r.graph);
        stats = r.stats;
        break;
      }
    }
    stats.iteration = it;
    stats.wall_seconds = elapsed();
    if (config.score_mode == ScoreMode::exact) {
      const auto t0 = clock::now();
      stats.score = exact_score(points, next, chunk);
      excluded += std::chrono::duration<double>(clock::now() - t0).count();
    }
    centers = std::move(next);
    history.push_back(stats);
    if (on_iteration) on_iteration(stats);
    if (stats.wall_seconds > config.time_limit_seconds) break;
    // Unmoved centers make the next exact pass a repeat of this one.
    if (config.engine == Engine::lloyd && (stats.avg_center_movement == 0.0 || (it > 0 && stats.reassigned_count == 0)))
      break;
  }
  if (final_centers != nullptr) *final_centers = std::move(centers);
  return history;
}

}  // namespace sheesh
