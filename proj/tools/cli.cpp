#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <random>

#include "sheesh/dataset.hpp"
#include "sheesh/kmeans.hpp"
#include "sheesh/report.hpp"
#include "sheesh/sanns.hpp"
#include "sheesh/vamanasp.hpp"

namespace sheesh::cli {

namespace {

VectorSet open_dataset(const std::filesystem::path& path, const std::string& format) {
  if (format == "fvecs") return open_fvecs(path);
  if (format == "bvecs") return open_bvecs(path);
  throw ConfigError("unknown format '" + format + "'");
}

void write_dataset(const std::filesystem::path& path, const std::string& format, const VectorSet& vs) {
  if (format == "fvecs") return write_fvecs(path, vs);
  if (format == "bvecs") return write_bvecs(path, vs);
  throw ConfigError("unknown format '" + format + "'");
}

// Quantizes [0, 1] values to bytes so generated data can be stored as bvecs.
VectorSet to_bytes(const VectorSet& vs) {
  std::vector<float> data(vs.data().begin(), vs.data().end());
  for (auto& v : data) v = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f);
  return VectorSet::from_memory(std::move(data), vs.dim());
}

std::uint64_t env_seed() {
  const char* s = std::getenv("SHEESH_SEED");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("SHEESH_SEED is not an integer: ") + s);
  return v;
}

void set_threads(std::size_t threads) {
  if (threads == 0) throw ConfigError("threads must be positive");
  omp_set_num_threads(static_cast<int>(threads));
}

struct GenArgs {
  std::size_t n = 10000;
  std::size_t d = 32;
  std::size_t clusters = 100;
  float spread = 0.02f;
  std::uint64_t seed = 0;
  std::string format = "fvecs";
  std::filesystem::path output;
};

struct ConvertArgs {
  std::filesystem::path input;
  std::string input_format = "bvecs";
  std::filesystem::path output;
  std::string output_format = "fvecs";
};

struct BenchArgs {
  std::size_t n = 2000;
  std::size_t d = 16;
  std::size_t clusters = 20;
  float spread = 0.05f;
  std::size_t queries = 500;
  std::size_t ef_search = 10;
  std::size_t ef_build = 200;
  std::size_t M = 16;
  double alpha = 2.0;
  double epsilon = 0.5;
  std::uint64_t seed = 0;
  std::size_t threads = 12;
  std::filesystem::path output;
};

struct VamanaArgs {
  std::size_t n = 256;
  std::size_t d = 8;
  std::size_t instances = 5;
  std::size_t trials = 200;
  double alpha = 2.0;
  double epsilon = 0.5;
  std::uint64_t seed = 0;
};

struct Variant {
  std::string name;
  std::size_t hits = 0;
  std::size_t within_ratio = 0;
  double visits = 0.0;
  double distances = 0.0;
};

void emit_variants(std::ostream& os, const std::vector<Variant>& vs, std::size_t queries) {
  os << "variant,recall_at_1,mean_visits,mean_distances,guarantee_rate\n";
  char buf[256];
  for (const auto& v : vs) {
    const double q = static_cast<double>(queries);
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g\n", v.name.c_str(), v.hits / q, v.visits / q,
                  v.distances / q, v.within_ratio / q);
    os << buf;
  }
}

void bench_sanns(const BenchArgs& a, std::ostream& out) {
  set_threads(a.threads);
  const VectorSet base = gen_gaussian_mixture(a.n, a.d, a.clusters, a.spread, a.seed);
  const VectorSet queries = gen_gaussian_mixture(a.queries, a.d, a.clusters, a.spread, a.seed);
  const PointsView pv(base.data(), base.dim());
  BuildParams bp;
  bp.ef_build = a.ef_build;
  bp.M = a.M;
  bp.level_seed = a.seed + 1;
  const SearchGraph g = bulk_build(pv, bp);
  SearchParams sp;
  sp.beam_width = a.ef_search;
  sp.result_count = 1;
  const double ratio = (a.alpha + 1.0) / (a.alpha - 1.0) + a.epsilon;

  std::optional<vamana::AlphaGraph> ag;
  std::optional<vamana::ProjectionIndex> proj;
  if (a.n <= vamana::AlphaParams{}.max_points) {
    ag = vamana::build_slow(pv, vamana::AlphaParams{a.alpha, a.epsilon});
    proj.emplace(pv, a.seed + 2);
  }

  std::vector<Variant> vs{{"unseeded"}, {"seeded_nn"}, {"seeded_random"}};
  if (ag) {
    vs.push_back({"vamana_random_start"});
    vs.push_back({"vamana_projection_seed"});
  }
  std::mt19937_64 rng(a.seed + 3);
  std::uniform_int_distribution<NodeId> any(0, static_cast<NodeId>(a.n - 1));
  for (std::size_t i = 0; i < a.queries; ++i) {
    const auto q = queries.row(i);
    const Neighbor nn = nearest_brute(q, pv, 1).front();
    const double nn_dist = std::sqrt(static_cast<double>(nn.distance));
    auto score = [&](Variant& v, NodeId found, double visits, double dists) {
      const double d = vamana::distance(pv.row(found), q);
      v.hits += d <= nn_dist ? 1 : 0;
      v.within_ratio += d <= ratio * nn_dist ? 1 : 0;
      v.visits += visits;
      v.distances += dists;
    };
    const NodeId nn_id = nn.id;
    const NodeId rand_id = any(rng);
    const std::vector<std::vector<NodeId>> seeds{{}, {nn_id}, {rand_id}};
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const SearchTrace t = seeded_query(g, q, seeds[s], sp);
      score(vs[s], t.results.front().id, static_cast<double>(t.visited_count), static_cast<double>(t.distance_count));
    }
    if (ag) {
      const auto r = vamana::greedy_search_counted(*ag, q, any(rng));
      score(vs[3], r.best, static_cast<double>(r.visit_count), static_cast<double>(r.distance_count));
      const auto p = vamana::greedy_search_counted(*ag, q, proj->seed_for(q));
      score(vs[4], p.best, static_cast<double>(p.visit_count), static_cast<double>(p.distance_count));
    }
  }
  emit_variants(out, vs, a.queries);
}

void vamana_experiment(const VamanaArgs& a, std::ostream& out) {
  std::size_t robust_violations = 0;
  std::size_t consistency_violations = 0;
  std::size_t robust_checks = 0;
  std::size_t max_degree = 0;
  std::mt19937_64 rng(a.seed);
  for (std::size_t inst = 0; inst < a.instances; ++inst) {
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    std::vector<float> coords(a.n * a.d);
    for (auto& x : coords) x = unit(rng);
    const PointsView pv(coords, a.d);
    const auto g = vamana::build_slow(pv, {a.alpha, a.epsilon});
    max_degree = std::max(max_degree, g.max_degree());
    for (std::size_t t = 0; t < a.trials; ++t) {
      std::vector<float> q(a.d);
      for (auto& x : q) x = unit(rng);
      const double nn = std::sqrt(static_cast<double>(nearest_brute(q, pv, 1).front().distance));
      const NodeId start = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(a.n - 1))(rng);
      const auto r = vamana::greedy_search_counted(g, q, start);
      ++robust_checks;
      robust_violations += r.distance <= g.guarantee_ratio() * nn ? 0 : 1;
      consistency_violations += vamana::seeded_greedy_search(g, q, start).guarantee_met ? 0 : 1;
    }
  }
  out << "checks,robustness_violations,consistency_violations,max_degree\n"
      << robust_checks << ',' << robust_violations << ',' << consistency_violations << ',' << max_degree << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-means for large k with seeded search graphs"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string engine = "sheesh";
  std::string init = "uniform";
  std::string score_mode = "assigned";
  std::optional<std::uint64_t> seed_flag;
  auto* cluster = app.add_subcommand("cluster", "Run a clustering and write one CSV row per iteration");
  cluster->add_option("--dataset", cfg.dataset, "fvecs or bvecs file")->required();
  cluster->add_option("--format", cfg.format)->check(CLI::IsMember({"fvecs", "bvecs"}));
  cluster->add_option("--k", cfg.k)->required();
  cluster->add_option("--engine", engine)->check(CLI::IsMember({"lloyd", "blackbox", "sheesh"}));
  cluster->add_option("--init", init)->check(CLI::IsMember({"uniform", "kmeanspp"}));
  cluster->add_option("--seed", seed_flag, "Overrides SHEESH_SEED");
  cluster->add_option("--time-limit-seconds", cfg.time_limit_seconds);
  cluster->add_option("--max-iterations", cfg.max_iterations);
  cluster->add_option("--ef-build", cfg.ef_build);
  cluster->add_option("--M", cfg.M);
  cluster->add_option("--ef-search", cfg.ef_search, "Defaults to 10 x num-prev-assignments");
  cluster->add_option("--min-iterations", cfg.min_iterations);
  cluster->add_option("--num-prev-assignments", cfg.num_prev_assignments);
  cluster->add_option("--avoid-regress", cfg.avoid_regress);
  cluster->add_option("--enable-seeds", cfg.enable_seeds);
  cluster->add_option("--enable-bulk", cfg.enable_bulk);
  cluster->add_option("--enable-min-iter", cfg.enable_min_iter);
  cluster->add_option("--use-rebuilds", cfg.use_rebuilds);
  cluster->add_option("--threads", cfg.threads);
  cluster->add_option("--chunk-size", cfg.chunk_size);
  cluster->add_option("--score-mode", score_mode)->check(CLI::IsMember({"assigned", "exact"}));
  cluster->add_option("--output", cfg.output, "CSV path; stdout when omitted");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a Gaussian mixture dataset");
  gen_cmd->add_option("--n", gen.n)->required();
  gen_cmd->add_option("--d", gen.d)->required();
  gen_cmd->add_option("--clusters", gen.clusters);
  gen_cmd->add_option("--spread", gen.spread);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--format", gen.format)->check(CLI::IsMember({"fvecs", "bvecs"}));
  gen_cmd->add_option("--output", gen.output)->required();

  ConvertArgs conv;
  auto* conv_cmd = app.add_subcommand("convert", "Convert between fvecs and bvecs");
  conv_cmd->add_option("--input", conv.input)->required();
  conv_cmd->add_option("--input-format", conv.input_format)->check(CLI::IsMember({"fvecs", "bvecs"}));
  conv_cmd->add_option("--output", conv.output)->required();
  conv_cmd->add_option("--output-format", conv.output_format)->check(CLI::IsMember({"fvecs", "bvecs"}));

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench-sanns", "Compare unseeded, seeded and projection-seeded search");
  bench_cmd->add_option("--n", bench.n);
  bench_cmd->add_option("--d", bench.d);
  bench_cmd->add_option("--clusters", bench.clusters);
  bench_cmd->add_option("--spread", bench.spread);
  bench_cmd->add_option("--queries", bench.queries);
  bench_cmd->add_option("--ef-search", bench.ef_search);
  bench_cmd->add_option("--ef-build", bench.ef_build);
  bench_cmd->add_option("--M", bench.M);
  bench_cmd->add_option("--alpha", bench.alpha);
  bench_cmd->add_option("--epsilon", bench.epsilon);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--threads", bench.threads);
  bench_cmd->add_option("--output", bench.output);

  VamanaArgs vam;
  auto* vam_cmd = app.add_subcommand("vamana", "Check the alpha-graph guarantees on random instances");
  vam_cmd->group("");
  vam_cmd->add_option("--n", vam.n);
  vam_cmd->add_option("--d", vam.d);
  vam_cmd->add_option("--instances", vam.instances);
  vam_cmd->add_option("--trials", vam.trials);
  vam_cmd->add_option("--alpha", vam.alpha);
  vam_cmd->add_option("--epsilon", vam.epsilon);
  vam_cmd->add_option("--seed", vam.seed);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }

    if (cluster->parsed()) {
      cfg.seed = seed_flag ? *seed_flag : env_seed();
      cfg.engine = engine == "lloyd" ? Engine::lloyd : engine == "blackbox" ? Engine::blackbox : Engine::sheesh;
      cfg.init = init == "uniform" ? InitMethod::uniform : InitMethod::kmeanspp;
      cfg.score_mode = score_mode == "exact" ? ScoreMode::exact : ScoreMode::assigned;
      cfg.validate();
      set_threads(cfg.threads);
      const VectorSet points = open_dataset(cfg.dataset, cfg.format);
      cfg.validate(points.size());
      std::optional<CsvWriter> writer;
      if (!cfg.output.empty()) writer.emplace(cfg.output);
      if (!writer) out << kCsvHeader << '\n';
      run_clustering(cfg, points, [&](const IterationStats& s) {
        const CsvRow row = make_row(s, cfg.engine, cfg.k, cfg.seed);
        if (writer) {
          writer->write(row);
        } else {
          out << format_csv_row(row) << '\n' << std::flush;
        }
      });
    } else if (gen_cmd->parsed()) {
      const VectorSet vs = gen_gaussian_mixture(gen.n, gen.d, gen.clusters, gen.spread, gen.seed);
      write_dataset(gen.output, gen.format, gen.format == "bvecs" ? to_bytes(vs) : vs);
    } else if (conv_cmd->parsed()) {
      write_dataset(conv.output, conv.output_format, open_dataset(conv.input, conv.input_format).load());
    } else if (bench_cmd->parsed()) {
      if (bench.n == 0 || bench.queries == 0 || bench.ef_search == 0) throw ConfigError("n, queries and ef-search must be positive");
      if (!(bench.alpha > 1.0)) throw ConfigError("alpha must exceed 1");
      if (bench.output.empty()) {
        bench_sanns(bench, out);
      } else {
        std::ofstream f(bench.output);
        if (!f) throw IoError("cannot open " + bench.output.string());
        bench_sanns(bench, f);
      }
    } else if (vam_cmd->parsed()) {
      if (vam.n < 2 || !(vam.alpha > 1.0)) throw ConfigError("need n >= 2 and alpha > 1");
      vamana_experiment(vam, out);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ContractViolation& e) {
    err << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace sheesh::cli
