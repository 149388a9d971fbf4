#include "sheesh/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace sheesh {

static_assert(std::endian::native == std::endian::little,
              "vector file readers assume a little-endian host");

namespace {

std::size_t element_bytes(ElementKind kind) { return kind == ElementKind::float32 ? 4 : 1; }

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

// Walks every record header and returns (dim, count). dim is 0 for an empty file.
std::pair<std::size_t, std::size_t> scan_headers(const std::filesystem::path& path,
                                                 ElementKind kind) {
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());

  auto in = open_for_read(path);
  const std::size_t elem = element_bytes(kind);
  std::uint64_t offset = 0;
  std::int32_t first_dim = 0;
  std::size_t count = 0;
  while (offset < file_size) {
    if (file_size - offset < 4) throw FormatError("trailing bytes after last record", offset);
    in.seekg(static_cast<std::streamoff>(offset));
    std::int32_t dim = 0;
    if (!in.read(reinterpret_cast<char*>(&dim), 4)) throw IoError("read failed on " + path.string());
    if (dim <= 0) throw FormatError("non-positive dimension header " + std::to_string(dim), offset);
    if (first_dim == 0) {
      first_dim = dim;
    } else if (dim != first_dim) {
      throw FormatError("dimension header " + std::to_string(dim) + " differs from first record's " +
                            std::to_string(first_dim),
                        offset);
    }
    const std::uint64_t record = 4 + static_cast<std::uint64_t>(dim) * elem;
    if (file_size - offset < record) throw FormatError("truncated record", offset);
    offset += record;
    ++count;
  }
  return {static_cast<std::size_t>(first_dim), count};
}

// Reads `count` records starting at the stream's current position into `out`.
// `first_offset` is only used for error messages.
void read_records(std::istream& in, ElementKind kind, std::size_t dim, std::size_t count,
                  std::uint64_t first_offset, std::span<float> out, std::vector<std::uint8_t>& bytes) {
  const std::uint64_t record = 4 + dim * element_bytes(kind);
  for (std::size_t r = 0; r < count; ++r) {
    std::int32_t header = 0;
    if (!in.read(reinterpret_cast<char*>(&header), 4)) throw IoError("short read");
    if (header != static_cast<std::int32_t>(dim)) {
      throw FormatError("dimension header " + std::to_string(header) + " differs from " +
                            std::to_string(dim),
                        first_offset + r * record);
    }
    float* dst = out.data() + r * dim;
    if (kind == ElementKind::float32) {
      if (!in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(dim * 4)))
        throw IoError("short read");
    } else {
      bytes.resize(dim);
      if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(dim)))
        throw IoError("short read");
      for (std::size_t j = 0; j < dim; ++j) dst[j] = static_cast<float>(bytes[j]);
    }
  }
}

}  // namespace

VectorSet VectorSet::from_memory(std::vector<float> data, std::size_t dim) {
  SHEESH_EXPECTS(dim >= 1, "dimension must be positive");
  SHEESH_EXPECTS(data.size() % dim == 0, "buffer length is not a multiple of the dimension");
  VectorSet vs;
  vs.dim_ = dim;
  vs.count_ = data.size() / dim;
  vs.memory_ = std::make_shared<const std::vector<float>>(std::move(data));
  return vs;
}

std::span<const float> VectorSet::data() const {
  SHEESH_EXPECTS(memory_ != nullptr, "data() requires an in-memory vector set");
  return {memory_->data(), memory_->size()};
}

std::span<const float> VectorSet::row(std::size_t index) const {
  SHEESH_EXPECTS(index < count_, "row index out of range");
  return data().subspan(index * dim_, dim_);
}

void VectorSet::read_rows(std::size_t start, std::size_t count, std::span<float> out) const {
  SHEESH_EXPECTS(start + count <= count_, "row range out of bounds");
  SHEESH_EXPECTS(out.size() >= count * dim_, "output buffer too small");
  if (count == 0) return;
  if (memory_) {
    std::memcpy(out.data(), memory_->data() + start * dim_, count * dim_ * sizeof(float));
    return;
  }
  auto in = open_for_read(path_);
  const std::uint64_t record = 4 + dim_ * element_bytes(kind_);
  const std::uint64_t offset = start * record;
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<std::uint8_t> bytes;
  read_records(in, kind_, dim_, count, offset, out, bytes);
}

VectorSet VectorSet::load() const {
  if (memory_) return *this;
  std::vector<float> all(count_ * dim_);
  read_rows(0, count_, all);
  VectorSet vs = *this;
  vs.memory_ = std::make_shared<const std::vector<float>>(std::move(all));
  return vs;
}

VectorSet open_fvecs(const std::filesystem::path& path) {
  auto [dim, count] = scan_headers(path, ElementKind::float32);
  VectorSet vs;
  vs.dim_ = dim;
  vs.count_ = count;
  vs.kind_ = ElementKind::float32;
  vs.path_ = path;
  return vs;
}

VectorSet open_bvecs(const std::filesystem::path& path) {
  auto [dim, count] = scan_headers(path, ElementKind::uint8);
  VectorSet vs;
  vs.dim_ = dim;
  vs.count_ = count;
  vs.kind_ = ElementKind::uint8;
  vs.path_ = path;
  return vs;
}

namespace {

template <typename WriteRow>
void write_records(const std::filesystem::path& path, const VectorSet& vs, WriteRow&& write_row) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::int32_t dim = static_cast<std::int32_t>(vs.dim());
  stream_chunks(vs, 4096, [&](const Chunk& chunk) {
    for (std::size_t i = 0; i < chunk.count; ++i) {
      out.write(reinterpret_cast<const char*>(&dim), 4);
      write_row(out, chunk.row(i));
    }
  });
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace

void write_fvecs(const std::filesystem::path& path, const VectorSet& vs) {
  write_records(path, vs, [](std::ofstream& out, std::span<const float> row) {
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  });
}

void write_bvecs(const std::filesystem::path& path, const VectorSet& vs) {
  std::vector<std::uint8_t> bytes(vs.dim());
  write_records(path, vs, [&](std::ofstream& out, std::span<const float> row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      const float v = row[j];
      if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v))
        throw ContractViolation("bvecs values must be integers in [0, 255]");
      bytes[j] = static_cast<std::uint8_t>(v);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  });
}

void stream_chunks(const VectorSet& vs, std::size_t chunk_size, const ChunkSink& sink) {
  SHEESH_EXPECTS(chunk_size >= 1, "chunk_size must be positive");
  const std::size_t n = vs.size();
  if (n == 0) return;
  const std::size_t dim = vs.dim();

  if (vs.in_memory()) {
    const auto all = vs.data();
    for (std::size_t start = 0; start < n; start += chunk_size) {
      const std::size_t count = std::min(chunk_size, n - start);
      sink(Chunk{start, count, dim, all.subspan(start * dim, count * dim)});
    }
    return;
  }

  std::ifstream in(vs.path(), std::ios::binary);
  if (!in) throw StreamError("cannot open " + vs.path().string(), std::nullopt);
  std::vector<float> buffer(std::min(chunk_size, n) * dim);
  std::vector<std::uint8_t> bytes;
  const std::uint64_t record = 4 + dim * element_bytes(vs.element_kind());
  std::optional<std::size_t> last_delivered;
  std::size_t chunk_index = 0;
  for (std::size_t start = 0; start < n; start += chunk_size, ++chunk_index) {
    const std::size_t count = std::min(chunk_size, n - start);
    std::span<float> dst(buffer.data(), count * dim);
    try {
      read_records(in, vs.element_kind(), dim, count, start * record, dst, bytes);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw StreamError("reading " + vs.path().string() + " failed in chunk " +
                            std::to_string(chunk_index) + ": " + e.what(),
                        last_delivered);
    }
    sink(Chunk{start, count, dim, dst});
    last_delivered = chunk_index;
  }
}

VectorSet gen_gaussian_mixture(std::size_t n, std::size_t d, std::size_t n_clusters, float spread,
                               std::uint64_t seed) {
  SHEESH_EXPECTS(n >= 1 && d >= 1 && n_clusters >= 1, "n, d and n_clusters must be positive");
  SHEESH_EXPECTS(spread >= 0.0f, "spread must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> centers(n_clusters * d);
  for (auto& c : centers) c = unit(rng);

  std::uniform_int_distribution<std::size_t> pick(0, n_clusters - 1);
  std::normal_distribution<float> noise(0.0f, spread > 0.0f ? spread : 1.0f);
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const float* center = centers.data() + pick(rng) * d;
    float* row = data.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = center[j] + (spread > 0.0f ? noise(rng) : 0.0f);
  }
  return VectorSet::from_memory(std::move(data), d);
}

}  // namespace sheesh
