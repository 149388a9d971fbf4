#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <new>

#include "oracle.hpp"
#include "sheesh/dataset.hpp"

// Global allocation accounting: live bytes and the high-water mark.
namespace {
std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};

void* counted_alloc(std::size_t n) {
  auto* p = static_cast<std::size_t*>(std::malloc(n + sizeof(std::max_align_t)));
  if (p == nullptr) throw std::bad_alloc();
  *p = n;
  const std::size_t live = g_live.fetch_add(n) + n;
  std::size_t peak = g_peak.load();
  while (live > peak && !g_peak.compare_exchange_weak(peak, live)) {
  }
  return reinterpret_cast<char*>(p) + sizeof(std::max_align_t);
}

void counted_free(void* q) noexcept {
  if (q == nullptr) return;
  auto* p = reinterpret_cast<std::size_t*>(static_cast<char*>(q) - sizeof(std::max_align_t));
  g_live.fetch_sub(*p);
  std::free(p);
}
}  // namespace

void* operator new(std::size_t n) { return counted_alloc(n); }
void* operator new[](std::size_t n) { return counted_alloc(n); }
void operator delete(void* p) noexcept { counted_free(p); }
void operator delete[](void* p) noexcept { counted_free(p); }
void operator delete(void* p, std::size_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::size_t) noexcept { counted_free(p); }

using namespace sheesh;

namespace {

// Peak bytes above the starting level while streaming the whole file.
std::size_t streaming_peak(const std::filesystem::path& path, std::size_t chunk) {
  const VectorSet vs = open_fvecs(path);
  const std::size_t base = g_live.load();
  g_peak.store(base);
  double checksum = 0.0;
  stream_chunks(vs, chunk, [&](const Chunk& c) { checksum += c.vectors.front(); });
  CHECK(checksum != 0.0);
  return g_peak.load() - base;
}

}  // namespace

TEST_CASE("streaming memory is bounded by the chunk, not the file") {
  oracle::TempDir dir;
  const std::size_t d = 8;
  const std::size_t chunk = 64;
  oracle::Gen gen(1);
  write_fvecs(dir / "small.fvecs", VectorSet::from_memory(gen.uniform(2'000, d, 1.0f, 2.0f), d));
  write_fvecs(dir / "large.fvecs", VectorSet::from_memory(gen.uniform(40'000, d, 1.0f, 2.0f), d));

  const std::size_t small = streaming_peak(dir / "small.fvecs", chunk);
  const std::size_t large = streaming_peak(dir / "large.fvecs", chunk);
  const std::size_t overhead = 64 * 1024;  // stream buffers, path strings, std::function
  CHECK(large <= chunk * d * sizeof(float) + overhead);
  CHECK(large == small);
  // the whole file would be 40000 * 8 * 4 bytes
  CHECK(large < 40'000 * d * sizeof(float) / 10);
}
