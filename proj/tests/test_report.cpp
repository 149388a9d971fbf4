#include <doctest.h>

#include <fstream>

#include "oracle.hpp"
#include "sheesh/report.hpp"

using namespace sheesh;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("row formatting") {
  CsvRow r;
  r.iteration = 3;
  r.wall_seconds = 1.5;
  r.score = 1.0 / 3.0;
  r.avg_center_movement = 0.0;
  r.reassigned_count = 12;
  r.engine = "sheesh";
  r.k = 500;
  r.seed = 18446744073709551615ULL;
  CHECK(format_csv_row(r) == "3,1.5,0.333333333,0,12,sheesh,500,18446744073709551615");
}

TEST_CASE("make_row copies stats") {
  IterationStats s;
  s.iteration = 2;
  s.score = 7.25;
  s.wall_seconds = 0.5;
  s.avg_center_movement = 0.125;
  s.reassigned_count = 4;
  const CsvRow r = make_row(s, Engine::blackbox, 9, 42);
  CHECK(r.engine == "blackbox");
  CHECK(r.iteration == 2);
  CHECK(r.score == 7.25);
  CHECK(r.avg_center_movement == 0.125);
  CHECK(r.reassigned_count == 4);
  CHECK(r.k == 9);
  CHECK(r.seed == 42);
}

TEST_CASE("writer output reads back") {
  oracle::TempDir dir;
  const auto path = dir / "run.csv";
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < 4; ++i) {
    CsvRow r;
    r.iteration = i;
    r.wall_seconds = 0.25 * static_cast<double>(i + 1);
    r.score = 1000.0 / static_cast<double>(i + 1);
    r.avg_center_movement = 0.5 / static_cast<double>(i + 1);
    r.reassigned_count = 100 - i;
    r.engine = "lloyd";
    r.k = 10;
    r.seed = 7;
    rows.push_back(r);
  }
  {
    CsvWriter w(path);
    CHECK(slurp(path) == std::string(kCsvHeader) + "\n");
    for (const auto& r : rows) {
      w.write(r);
    }
    // rows are flushed as they are written
    CHECK(slurp(path).size() > std::string(kCsvHeader).size() + 1);
  }
  const auto back = read_csv(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].iteration == rows[i].iteration);
    CHECK(oracle::rel_close(back[i].score, rows[i].score, 1e-8));
    CHECK(oracle::rel_close(back[i].wall_seconds, rows[i].wall_seconds, 1e-8));
    CHECK(oracle::rel_close(back[i].avg_center_movement, rows[i].avg_center_movement, 1e-8));
    CHECK(back[i].reassigned_count == rows[i].reassigned_count);
    CHECK(back[i].engine == "lloyd");
    CHECK(back[i].k == 10);
    CHECK(back[i].seed == 7);
  }
}

TEST_CASE("reader rejects malformed files") {
  oracle::TempDir dir;
  spit(dir / "header.csv", "iteration,score\n0,1\n");
  CHECK_THROWS_AS(read_csv(dir / "header.csv"), FormatError);

  spit(dir / "field.csv", std::string(kCsvHeader) + "\n0,0.1,5,0,3,lloyd,2,1\n1,0.2,abc,0,3,lloyd,2,1\n");
  try {
    (void)read_csv(dir / "field.csv");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 3);
  }

  spit(dir / "short.csv", std::string(kCsvHeader) + "\n0,0.1,5\n");
  CHECK_THROWS_AS(read_csv(dir / "short.csv"), FormatError);

  spit(dir / "empty.csv", std::string(kCsvHeader) + "\n");
  CHECK(read_csv(dir / "empty.csv").empty());

  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);
}
