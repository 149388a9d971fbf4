#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sheesh/kmeans.hpp"

namespace sheesh {

inline constexpr const char* kCsvHeader =
    "iteration,wall_seconds,score,avg_center_movement,reassigned_count,engine,k,seed";

struct CsvRow {
  std::size_t iteration = 0;
  double wall_seconds = 0.0;
  double score = 0.0;
  double avg_center_movement = 0.0;
  std::size_t reassigned_count = 0;
  std::string engine;
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

/// One line without the trailing newline; floats use 9 significant digits.
std::string format_csv_row(const CsvRow& row);

CsvRow make_row(const IterationStats& stats, Engine engine, std::size_t k, std::uint64_t seed);

/// Writes the header on open and flushes after every row, so an interrupted
/// run leaves a readable prefix.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void write(const CsvRow& row);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Throws FormatError on a header or field mismatch (offset = line number).
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

}  // namespace sheesh
