#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sheesh/common.hpp"

namespace sheesh {

enum class ElementKind { float32, uint8 };

/// A set of dense d-dimensional points, either held in memory or read from an
/// fvecs/bvecs file on demand. Values are always presented as float32; uint8
/// files are widened on read. Handles are cheap to copy and safe to share
/// between threads for reading.
class VectorSet {
 public:
  VectorSet() = default;

  static VectorSet from_memory(std::vector<float> data, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  ElementKind element_kind() const noexcept { return kind_; }
  bool in_memory() const noexcept { return memory_ != nullptr; }
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Contiguous row-major storage. Only valid for in-memory sets.
  std::span<const float> data() const;

  /// Row view for in-memory sets.
  std::span<const float> row(std::size_t index) const;

  /// Copies rows [start, start + count) into `out` (count * dim floats).
  void read_rows(std::size_t start, std::size_t count, std::span<float> out) const;

  /// Reads the whole set into memory (no-op copy for in-memory sets).
  VectorSet load() const;

 private:
  friend VectorSet open_fvecs(const std::filesystem::path&);
  friend VectorSet open_bvecs(const std::filesystem::path&);

  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  ElementKind kind_ = ElementKind::float32;
  std::filesystem::path path_;
  std::shared_ptr<const std::vector<float>> memory_;
};

/// fvecs: per record, a 4-byte little-endian int32 dimension followed by dim
/// little-endian float32 values. Every header is validated on open.
VectorSet open_fvecs(const std::filesystem::path& path);

/// bvecs: per record, a 4-byte dimension header followed by dim uint8 values.
VectorSet open_bvecs(const std::filesystem::path& path);

void write_fvecs(const std::filesystem::path& path, const VectorSet& vs);

/// Every value must be an integer in [0, 255].
void write_bvecs(const std::filesystem::path& path, const VectorSet& vs);

/// A contiguous block of rows delivered by stream_chunks.
struct Chunk {
  std::size_t start_index = 0;
  std::size_t count = 0;
  std::size_t dim = 0;
  std::span<const float> vectors;

  std::span<const float> row(std::size_t i) const { return vectors.subspan(i * dim, dim); }
};

/// Raised when reading fails part-way through stream_chunks.
class StreamError : public IoError {
 public:
  StreamError(const std::string& what, std::optional<std::size_t> last_delivered_chunk)
      : IoError(what), last_delivered_chunk_(last_delivered_chunk) {}
  /// Index (0-based) of the last chunk handed to the sink, if any.
  std::optional<std::size_t> last_delivered_chunk() const noexcept { return last_delivered_chunk_; }

 private:
  std::optional<std::size_t> last_delivered_chunk_;
};

using ChunkSink = std::function<void(const Chunk&)>;

/// Delivers `vs` in order as chunks of `chunk_size` rows (last may be
/// shorter). File-backed sets reuse one buffer of chunk_size * dim floats.
void stream_chunks(const VectorSet& vs, std::size_t chunk_size, const ChunkSink& sink);

inline std::size_t default_chunk_size(std::size_t k) { return std::max<std::size_t>(k, 65536); }

/// n points around n_clusters centers drawn uniformly from [0,1]^d, with
/// isotropic Gaussian noise of standard deviation `spread`.
VectorSet gen_gaussian_mixture(std::size_t n, std::size_t d, std::size_t n_clusters, float spread,
                               std::uint64_t seed);

}  // namespace sheesh
