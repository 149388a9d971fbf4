#include <doctest.h>

#include <cstring>
#include <fstream>

#include "oracle.hpp"
#include "sheesh/dataset.hpp"
#include "sheesh/kmeans.hpp"

using namespace sheesh;

namespace {

std::vector<std::uint8_t> fvecs_record(std::int32_t dim, const std::vector<float>& values) {
  std::vector<std::uint8_t> out(4 + values.size() * 4);
  std::memcpy(out.data(), &dim, 4);
  std::memcpy(out.data() + 4, values.data(), values.size() * 4);
  return out;
}

std::vector<std::uint8_t> concat(std::initializer_list<std::vector<std::uint8_t>> parts) {
  std::vector<std::uint8_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<float> read_all(const VectorSet& vs) {
  std::vector<float> out(vs.size() * vs.dim());
  vs.read_rows(0, vs.size(), out);
  return out;
}

}  // namespace

TEST_CASE("fvecs record bytes decode as little-endian float32") {
  oracle::TempDir dir;
  const auto path = dir / "one.fvecs";
  oracle::write_bytes(path, {0x02, 0, 0, 0, 0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40});
  const VectorSet vs = open_fvecs(path);
  CHECK(vs.size() == 1);
  CHECK(vs.dim() == 2);
  CHECK(vs.element_kind() == ElementKind::float32);
  CHECK(read_all(vs) == std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("empty fvecs file has no vectors") {
  oracle::TempDir dir;
  const auto path = dir / "empty.fvecs";
  oracle::write_bytes(path, {});
  const VectorSet vs = open_fvecs(path);
  CHECK(vs.size() == 0);
  std::vector<float> buf(4);
  CHECK_THROWS_AS(vs.read_rows(0, 1, buf), ContractViolation);
  int calls = 0;
  stream_chunks(vs, 4, [&](const Chunk&) { ++calls; });
  CHECK(calls == 0);
}

TEST_CASE("fvecs dimension mismatch is reported at the offending record") {
  oracle::TempDir dir;
  const auto path = dir / "bad.fvecs";
  const auto r1 = fvecs_record(4, {1, 2, 3, 4});
  const auto r2 = fvecs_record(5, {1, 2, 3, 4, 5});
  const auto r3 = fvecs_record(4, {1, 2, 3, 4});
  oracle::write_bytes(path, concat({r1, r2, r3}));
  try {
    (void)open_fvecs(path);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.offset() == r1.size());
  }
}

TEST_CASE("fvecs malformed headers") {
  oracle::TempDir dir;
  SUBCASE("non-positive dimension") {
    oracle::write_bytes(dir / "a.fvecs", fvecs_record(0, {}));
    CHECK_THROWS_AS(open_fvecs(dir / "a.fvecs"), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto bytes = fvecs_record(2, {1, 2});
    bytes.push_back(7);
    oracle::write_bytes(dir / "b.fvecs", bytes);
    try {
      (void)open_fvecs(dir / "b.fvecs");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 12);
    }
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(open_fvecs(dir / "nope.fvecs"), IoError); }
}

TEST_CASE("bvecs records widen to float") {
  oracle::TempDir dir;
  oracle::write_bytes(dir / "one.bvecs", {0x03, 0, 0, 0, 1, 2, 3});
  const VectorSet one = open_bvecs(dir / "one.bvecs");
  CHECK(one.element_kind() == ElementKind::uint8);
  CHECK(read_all(one) == std::vector<float>{1.0f, 2.0f, 3.0f});

  oracle::write_bytes(dir / "two.bvecs", {3, 0, 0, 0, 1, 2, 3, 3, 0, 0, 0, 4, 5, 255});
  const VectorSet two = open_bvecs(dir / "two.bvecs");
  CHECK(two.size() == 2);
  CHECK(read_all(two) == std::vector<float>{1, 2, 3, 4, 5, 255});

  oracle::write_bytes(dir / "cut.bvecs", {3, 0, 0, 0, 1, 2, 3, 3, 0, 0, 0, 4});
  CHECK_THROWS_AS(open_bvecs(dir / "cut.bvecs"), FormatError);
}

TEST_CASE("fvecs round trip is byte exact") {
  oracle::TempDir dir;
  oracle::Gen gen(11);
  const auto data = gen.gaussian(37, 5, 100.0f);
  write_fvecs(dir / "a.fvecs", VectorSet::from_memory(data, 5));
  const auto original = oracle::read_bytes(dir / "a.fvecs");
  CHECK(original.size() == 37 * (4 + 5 * 4));
  write_fvecs(dir / "b.fvecs", open_fvecs(dir / "a.fvecs"));
  CHECK(oracle::read_bytes(dir / "b.fvecs") == original);
  CHECK(read_all(open_fvecs(dir / "a.fvecs")) == data);
}

TEST_CASE("bvecs writer rejects non-byte values") {
  oracle::TempDir dir;
  CHECK_THROWS_AS(write_bvecs(dir / "x.bvecs", VectorSet::from_memory({1.5f, 2.0f}, 2)), ContractViolation);
  CHECK_THROWS_AS(write_bvecs(dir / "y.bvecs", VectorSet::from_memory({256.0f, 2.0f}, 2)), ContractViolation);
}

TEST_CASE("chunk boundaries") {
  std::vector<float> data(10);
  for (int i = 0; i < 10; ++i) data[static_cast<std::size_t>(i)] = static_cast<float>(i);
  const VectorSet vs = VectorSet::from_memory(data, 1);
  std::vector<std::size_t> sizes, starts;
  stream_chunks(vs, 4, [&](const Chunk& c) {
    sizes.push_back(c.count);
    starts.push_back(c.start_index);
  });
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
  CHECK(starts == std::vector<std::size_t>{0, 4, 8});

  int calls = 0;
  stream_chunks(VectorSet::from_memory({1, 2, 3, 4}, 1), 4, [&](const Chunk&) { ++calls; });
  CHECK(calls == 1);
  CHECK_THROWS_AS(stream_chunks(vs, 0, [](const Chunk&) {}), ContractViolation);
}

TEST_CASE("streamed chunks concatenate to the full set") {
  oracle::TempDir dir;
  oracle::Gen gen(5);
  const std::size_t n = 23, d = 3;
  const auto data = gen.uniform(n, d, -5.0f, 5.0f);
  write_fvecs(dir / "s.fvecs", VectorSet::from_memory(data, d));
  const VectorSet on_disk = open_fvecs(dir / "s.fvecs");
  const VectorSet in_mem = VectorSet::from_memory(data, d);
  for (std::size_t cs : {std::size_t{1}, std::size_t{3}, n, n + 1}) {
    for (const VectorSet* vs : {&on_disk, &in_mem}) {
      std::vector<float> joined;
      std::size_t expected_start = 0;
      stream_chunks(*vs, cs, [&](const Chunk& c) {
        CHECK(c.start_index == expected_start);
        CHECK((c.count == cs || c.start_index + c.count == n));
        expected_start += c.count;
        joined.insert(joined.end(), c.vectors.begin(), c.vectors.end());
      });
      CHECK(joined == data);
    }
  }
}

TEST_CASE("stream error reports the last delivered chunk") {
  oracle::TempDir dir;
  const auto path = dir / "t.fvecs";
  oracle::Gen gen(3);
  write_fvecs(path, VectorSet::from_memory(gen.uniform(10, 2), 2));
  const VectorSet vs = open_fvecs(path);
  // shrink the file behind the handle's back: records 0..5 survive
  std::filesystem::resize_file(path, 6 * 12);
  std::size_t delivered = 0;
  try {
    stream_chunks(vs, 4, [&](const Chunk&) { ++delivered; });
    FAIL("expected a stream error");
  } catch (const StreamError& e) {
    CHECK(delivered == 1);
    REQUIRE(e.last_delivered_chunk().has_value());
    CHECK(*e.last_delivered_chunk() == 0);
  }
}

TEST_CASE("load copies a file-backed set into memory") {
  oracle::TempDir dir;
  oracle::Gen gen(8);
  const auto data = gen.uniform(6, 4);
  write_fvecs(dir / "l.fvecs", VectorSet::from_memory(data, 4));
  const VectorSet loaded = open_fvecs(dir / "l.fvecs").load();
  CHECK(loaded.in_memory());
  CHECK(std::vector<float>(loaded.data().begin(), loaded.data().end()) == data);
}

TEST_CASE("gaussian mixture generator") {
  const VectorSet flat = gen_gaussian_mixture(100, 2, 1, 0.0f, 7);
  for (std::size_t i = 1; i < flat.size(); ++i) {
    CHECK(flat.row(i)[0] == flat.row(0)[0]);
    CHECK(flat.row(i)[1] == flat.row(0)[1]);
  }

  const VectorSet a = gen_gaussian_mixture(200, 5, 4, 0.1f, 3);
  const VectorSet b = gen_gaussian_mixture(200, 5, 4, 0.1f, 3);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end()));
  const VectorSet c = gen_gaussian_mixture(200, 5, 4, 0.1f, 4);
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin(), c.data().end()));
}

TEST_CASE("mixture with ten clusters is recovered by exact Lloyd") {
  const VectorSet pts = gen_gaussian_mixture(1000, 8, 10, 0.01f, 1);
  const std::vector<float> data(pts.data().begin(), pts.data().end());

  std::vector<float> mean(8, 0.0f);
  std::vector<double> acc(8, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < 8; ++j) acc[j] += data[i * 8 + j];
  for (std::size_t j = 0; j < 8; ++j) mean[j] = static_cast<float>(acc[j] / 1000.0);
  const double one_center = oracle::objective(data, mean, 8);

  // Independent oracle Lloyd from the same uniform start used by the engine.
  std::vector<float> centers = init_uniform(pts, 10, 1).centers;
  for (int it = 0; it < 30; ++it) centers = oracle::lloyd_step(data, centers, 8).centers;
  const double ten_centers = oracle::objective(data, centers, 8);
  // measured at freeze: ratio 0.0195 (one pair of clusters merged by the start)
  MESSAGE("ratio " << ten_centers / one_center);
  CHECK(ten_centers < 0.1 * one_center);
  CHECK(ten_centers / one_center == doctest::Approx(0.0195).epsilon(0.05));
}
