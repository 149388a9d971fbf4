#pragma once

// Test-only oracles and generators. Everything here is deliberately naive:
// plain loops in double precision, no library code on the checked path.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline double sq_dist(const float* a, const float* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += x * x;
  }
  return s;
}

/// |a - b| <= tol * max(|a|, |b|).
inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

struct Hit {
  std::uint32_t id;
  double dist;
};

/// All centers ranked by (distance, id).
inline std::vector<Hit> ranked(const float* q, const std::vector<float>& centers, std::size_t d) {
  const std::size_t k = centers.size() / d;
  std::vector<Hit> all(k);
  for (std::size_t c = 0; c < k; ++c) all[c] = {static_cast<std::uint32_t>(c), sq_dist(q, &centers[c * d], d)};
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.dist < b.dist || (a.dist == b.dist && a.id < b.id); });
  return all;
}

inline Hit nearest(const float* q, const std::vector<float>& centers, std::size_t d) {
  Hit best{0, sq_dist(q, centers.data(), d)};
  for (std::size_t c = 1; c < centers.size() / d; ++c) {
    const double x = sq_dist(q, &centers[c * d], d);
    if (x < best.dist) best = {static_cast<std::uint32_t>(c), x};
  }
  return best;
}

/// Objective with every point at its nearest center.
inline double objective(const std::vector<float>& pts, const std::vector<float>& centers, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size() / d; ++i) s += nearest(&pts[i * d], centers, d).dist;
  return s;
}

struct LloydStep {
  std::vector<std::uint32_t> labels;
  std::vector<float> centers;
  double score_after = 0.0;  // labels against the new centers
};

inline LloydStep lloyd_step(const std::vector<float>& pts, const std::vector<float>& centers, std::size_t d) {
  const std::size_t n = pts.size() / d;
  const std::size_t k = centers.size() / d;
  LloydStep out;
  out.labels.resize(n);
  std::vector<double> sums(k * d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = nearest(&pts[i * d], centers, d).id;
    out.labels[i] = c;
    ++counts[c];
    for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += pts[i * d + j];
  }
  out.centers = centers;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) out.centers[c * d + j] = static_cast<float>(sums[c * d + j] / counts[c]);
  }
  for (std::size_t i = 0; i < n; ++i) out.score_after += sq_dist(&pts[i * d], &out.centers[out.labels[i] * d], d);
  return out;
}

/// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::vector<float> uniform(std::size_t n, std::size_t d, float lo = 0.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> u(lo, hi);
    std::vector<float> v(n * d);
    for (auto& x : v) x = u(rng_);
    return v;
  }

  std::vector<float> gaussian(std::size_t n, std::size_t d, float sigma) {
    std::normal_distribution<float> g(0.0f, sigma);
    std::vector<float> v(n * d);
    for (auto& x : v) x = g(rng_);
    return v;
  }

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::uint64_t next() { return rng_(); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sheesh_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace oracle
