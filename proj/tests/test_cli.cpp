#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "../tools/cli.hpp"
#include "oracle.hpp"
#include "sheesh/dataset.hpp"
#include "sheesh/report.hpp"

using namespace sheesh;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "sheesh");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Every column except wall_seconds.
std::vector<std::string> stable_columns(const std::vector<CsvRow>& rows) {
  std::vector<std::string> out;
  for (auto r : rows) {
    r.wall_seconds = 0.0;
    out.push_back(format_csv_row(r));
  }
  return out;
}

}  // namespace

TEST_CASE("gen, convert and cluster") {
  oracle::TempDir dir;
  const std::string data = (dir / "g.fvecs").string();
  REQUIRE(run({"gen", "--n", "500", "--d", "4", "--clusters", "5", "--seed", "3", "--output", data}).code == 0);
  const VectorSet vs = open_fvecs(data);
  CHECK(vs.size() == 500);
  CHECK(vs.dim() == 4);

  const std::string bytes = (dir / "g.bvecs").string();
  REQUIRE(run({"gen", "--n", "50", "--d", "3", "--format", "bvecs", "--output", bytes}).code == 0);
  const std::string back = (dir / "back.fvecs").string();
  REQUIRE(run({"convert", "--input", bytes, "--output", back}).code == 0);
  const VectorSet b = open_bvecs(bytes).load();
  const VectorSet f = open_fvecs(back).load();
  CHECK(std::equal(b.data().begin(), b.data().end(), f.data().begin(), f.data().end()));

  const std::string csv = (dir / "lloyd.csv").string();
  const auto r = run({"cluster", "--dataset", data, "--k", "20", "--engine", "lloyd", "--max-iterations", "3",
                      "--seed", "1", "--threads", "1", "--output", csv});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto rows = read_csv(csv);
  CHECK(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].iteration == i);
    CHECK(rows[i].engine == "lloyd");
    CHECK(rows[i].k == 20);
    CHECK(rows[i].seed == 1);
  }

  // stdout when no output path is given
  const auto to_stdout = run({"cluster", "--dataset", data, "--k", "5", "--engine", "lloyd", "--max-iterations", "0"});
  CHECK(to_stdout.code == 0);
  CHECK(to_stdout.out.rfind(kCsvHeader, 0) == 0);
}

TEST_CASE("exit codes") {
  oracle::TempDir dir;
  const std::string data = (dir / "g.fvecs").string();
  REQUIRE(run({"gen", "--n", "100", "--d", "2", "--output", data}).code == 0);

  CHECK(run({"cluster", "--dataset", data, "--k", "0"}).code == 2);
  CHECK(run({"cluster", "--dataset", data, "--k", "101"}).code == 2);
  CHECK(run({"cluster", "--dataset", data, "--k", "5", "--engine", "kmedoids"}).code == 2);
  CHECK(run({"cluster", "--dataset", data, "--k", "5", "--num-prev-assignments", "10", "--ef-search", "3"}).code == 2);
  CHECK(run({"cluster", "--dataset", data, "--k", "5", "--threads", "0"}).code == 2);
  CHECK(run({"cluster", "--k", "5"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);

  CHECK(run({"cluster", "--dataset", (dir / "none.fvecs").string(), "--k", "5"}).code == 3);
  oracle::write_bytes(dir / "bad.fvecs", {2, 0, 0, 0, 1, 2, 3});
  const auto bad = run({"cluster", "--dataset", (dir / "bad.fvecs").string(), "--k", "1"});
  CHECK(bad.code == 3);
  CHECK(!bad.err.empty());
}

TEST_CASE("SHEESH_SEED is the fallback seed") {
  oracle::TempDir dir;
  const std::string data = (dir / "g.fvecs").string();
  REQUIRE(run({"gen", "--n", "200", "--d", "3", "--output", data}).code == 0);
  ::setenv("SHEESH_SEED", "77", 1);
  const std::string a = (dir / "a.csv").string();
  REQUIRE(run({"cluster", "--dataset", data, "--k", "4", "--engine", "lloyd", "--max-iterations", "1", "--output", a})
              .code == 0);
  CHECK(read_csv(a).front().seed == 77);
  const std::string b = (dir / "b.csv").string();
  REQUIRE(run({"cluster", "--dataset", data, "--k", "4", "--engine", "lloyd", "--max-iterations", "1", "--seed",
               "5", "--output", b})
              .code == 0);
  CHECK(read_csv(b).front().seed == 5);
  ::setenv("SHEESH_SEED", "x1", 1);
  CHECK(run({"cluster", "--dataset", data, "--k", "4"}).code == 2);
  ::unsetenv("SHEESH_SEED");
}

TEST_CASE("single-threaded runs repeat exactly") {
  oracle::TempDir dir;
  const std::string data = (dir / "g.fvecs").string();
  REQUIRE(run({"gen", "--n", "3000", "--d", "8", "--clusters", "30", "--seed", "4", "--output", data}).code == 0);
  for (const std::string engine : {"lloyd", "blackbox", "sheesh"}) {
    std::vector<std::vector<std::string>> runs;
    for (int rep = 0; rep < 2; ++rep) {
      const std::string csv = (dir / (engine + std::to_string(rep) + ".csv")).string();
      REQUIRE(run({"cluster", "--dataset", data, "--k", "100", "--engine", engine, "--max-iterations", "4",
                   "--seed", "9", "--threads", "1", "--M", "8", "--ef-build", "32", "--output", csv})
                  .code == 0);
      runs.push_back(stable_columns(read_csv(csv)));
    }
    CHECK(runs[0] == runs[1]);
  }
}

TEST_CASE("ablation flags") {
  oracle::TempDir dir;
  const std::string data = (dir / "g.fvecs").string();
  REQUIRE(run({"gen", "--n", "2000", "--d", "8", "--clusters", "20", "--output", data}).code == 0);
  const std::string csv = (dir / "f.csv").string();
  const auto r = run({"cluster", "--dataset", data, "--k", "50", "--engine", "sheesh", "--enable-seeds", "false",
                      "--enable-bulk", "false", "--use-rebuilds", "false", "--num-prev-assignments", "1",
                      "--max-iterations", "3", "--M", "8", "--ef-build", "32", "--score-mode", "exact",
                      "--output", csv});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto rows = read_csv(csv);
  CHECK(rows.size() == 4);
  CHECK(rows.back().score <= rows.front().score);
}

TEST_CASE("bench-sanns finds every neighbor on a trivial instance") {
  const auto r = run({"bench-sanns", "--n", "300", "--d", "4", "--queries", "40", "--ef-search", "300", "--M", "8",
                      "--ef-build", "40", "--threads", "1"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "variant,recall_at_1,mean_visits,mean_distances,guarantee_rate");
  int variants = 0;
  while (std::getline(in, line)) {
    ++variants;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    CHECK(line.substr(first + 1, second - first - 1) == "1");
  }
  CHECK(variants == 5);
}

TEST_CASE("vamana experiment reports no violations") {
  const auto r = run({"vamana", "--n", "128", "--d", "4", "--instances", "2", "--trials", "50"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("checks,robustness_violations,consistency_violations,max_degree\n100,0,0,", 0) == 0);
}
