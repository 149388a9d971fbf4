#include "sheesh/report.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace sheesh {

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* column) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError(std::string("bad value '") + text + "' in column " + column, line);
  }
  return value;
}

}  // namespace

std::string format_csv_row(const CsvRow& row) {
  std::string s;
  s += std::to_string(row.iteration);
  s += ',' + fmt9(row.wall_seconds);
  s += ',' + fmt9(row.score);
  s += ',' + fmt9(row.avg_center_movement);
  s += ',' + std::to_string(row.reassigned_count);
  s += ',' + row.engine;
  s += ',' + std::to_string(row.k);
  s += ',' + std::to_string(row.seed);
  return s;
}

CsvRow make_row(const IterationStats& stats, Engine engine, std::size_t k, std::uint64_t seed) {
  return CsvRow{stats.iteration,        stats.wall_seconds, stats.score, stats.avg_center_movement,
                stats.reassigned_count, to_string(engine),  k,           seed};
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  out_ << kCsvHeader << '\n' << std::flush;
}

void CsvWriter::write(const CsvRow& row) {
  out_ << format_csv_row(row) << '\n' << std::flush;
  if (!out_) throw IoError("write to " + path_.string() + " failed");
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("unexpected CSV header", 1);
  static constexpr const char* columns[] = {"iteration", "wall_seconds", "score", "avg_center_movement",
                                            "reassigned_count", "engine", "k", "seed"};
  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw FormatError("expected 8 fields", line_no);
    CsvRow r;
    r.iteration = parse_field<std::size_t>(f[0], line_no, columns[0]);
    r.wall_seconds = parse_field<double>(f[1], line_no, columns[1]);
    r.score = parse_field<double>(f[2], line_no, columns[2]);
    r.avg_center_movement = parse_field<double>(f[3], line_no, columns[3]);
    r.reassigned_count = parse_field<std::size_t>(f[4], line_no, columns[4]);
    r.engine = f[5];
    r.k = parse_field<std::size_t>(f[6], line_no, columns[6]);
    r.seed = parse_field<std::uint64_t>(f[7], line_no, columns[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sheesh
