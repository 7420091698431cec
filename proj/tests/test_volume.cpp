#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"

#include "balloon/error.hpp"
#include "balloon/metaimage.hpp"
#include "balloon/volume.hpp"
#include "test_support.hpp"

using namespace balloon;
using balloon::testing::TempDir;

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorCode load_error(const std::string& path) {
  try {
    (void)load_metaimage(path);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected load_metaimage to throw");
  return ErrorCode::Io;
}

std::string header(const std::string& extra, const std::string& data_file = "LOCAL") {
  return "ObjectType = Image\nNDims = 3\nDimSize = 4 4 4\n" + extra + "ElementDataFile = " + data_file + "\n";
}

}  // namespace

TEST_CASE("uchar volume of sevens loads as float sevens") {
  TempDir dir;
  write_bytes(dir.file("sevens.mha"), header("ElementType = MET_UCHAR\n") + std::string(64, '\x07'));
  const ImageVolume v = load_metaimage(dir.file("sevens.mha"));
  CHECK(v.grid().dims == std::array<std::int64_t, 3>{4, 4, 4});
  CHECK(v.grid().spacing == Vec3{1, 1, 1});
  CHECK(v.grid().origin == Vec3{0, 0, 0});
  for (float s : v.data()) CHECK(s == 7.0f);
}

TEST_CASE("header errors are distinct") {
  TempDir dir;
  const std::string payload(64, '\x01');

  write_bytes(dir.file("nd2.mha"), "NDims = 2\nDimSize = 4 4\nElementType = MET_UCHAR\nElementDataFile = LOCAL\n" + payload);
  CHECK(load_error(dir.file("nd2.mha")) == ErrorCode::UnsupportedDimensionality);
  try {
    (void)load_metaimage(dir.file("nd2.mha"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("unsupported dimensionality") != std::string::npos);
  }

  write_bytes(dir.file("double.mha"), header("ElementType = MET_DOUBLE\n") + std::string(512, '\0'));
  CHECK(load_error(dir.file("double.mha")) == ErrorCode::UnsupportedElementType);

  write_bytes(dir.file("zip.mha"), header("CompressedData = True\nElementType = MET_UCHAR\n") + payload);
  CHECK(load_error(dir.file("zip.mha")) == ErrorCode::CompressedData);

  write_bytes(dir.file("short.mha"), header("ElementType = MET_UCHAR\n") + payload.substr(0, 63));
  CHECK(load_error(dir.file("short.mha")) == ErrorCode::ShortPayload);

  write_bytes(dir.file("detached.mhd"), header("ElementType = MET_UCHAR\n", "nowhere.raw"));
  CHECK(load_error(dir.file("detached.mhd")) == ErrorCode::MissingPayload);

  CHECK(load_error(dir.file("absent.mha")) == ErrorCode::Io);
}

TEST_CASE("mhd payload resolves relative to the header; MSB order honored") {
  TempDir dir;
  std::filesystem::create_directories(dir.path() / "sub");
  std::string payload;
  for (int i = 0; i < 64; ++i) {
    const auto v = static_cast<std::int16_t>(i * 100 - 3000);
    payload.push_back(static_cast<char>((static_cast<std::uint16_t>(v) >> 8) & 0xff));  // big-endian
    payload.push_back(static_cast<char>(static_cast<std::uint16_t>(v) & 0xff));
  }
  write_bytes(dir.file("sub/data.raw"), payload);
  write_bytes(dir.file("sub/vol.mhd"),
              header("ElementSpacing = 0.5 0.5 3\nOffset = -10 2 7.5\nElementType = MET_SHORT\nBinaryDataByteOrderMSB = True\n",
                     "data.raw"));
  const ImageVolume v = load_metaimage(dir.file("sub/vol.mhd"));
  CHECK(v.grid().spacing == Vec3{0.5, 0.5, 3});
  CHECK(v.grid().origin == Vec3{-10, 2, 7.5});
  for (int i = 0; i < 64; ++i) CHECK(v.data()[static_cast<std::size_t>(i)] == static_cast<float>(i * 100 - 3000));
}

TEST_CASE("512x512x80 MET_SHORT phantom round-trips bit-equal") {
  TempDir dir;
  GridGeometry grid{{512, 512, 80}, {0.5, 0.5, 1.0}, {-128, -128, 0}};
  std::vector<float> data(grid.voxel_count());
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> value(-32768, 32767);
  for (auto& d : data) d = static_cast<float>(value(rng));
  const ImageVolume original(grid, data);
  save_metaimage(original, dir.file("big.mhd"), ElementType::Short);
  const ImageVolume loaded = load_metaimage(dir.file("big.mhd"));
  CHECK(loaded.grid() == grid);
  CHECK(loaded.data() == original.data());
}

TEST_CASE("every element type round-trips through .mha") {
  TempDir dir;
  GridGeometry grid{{3, 2, 2}, {0.7, 1.1, 2.3}, {0.1, -0.2, 0.3}};
  const std::vector<float> values{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 255};
  for (ElementType t : {ElementType::UChar, ElementType::Short, ElementType::UShort, ElementType::Float}) {
    save_metaimage(ImageVolume(grid, values), dir.file("t.mha"), t);
    const ImageVolume v = load_metaimage(dir.file("t.mha"));
    CHECK(v.grid() == grid);
    CHECK(v.data() == values);
  }
  const std::vector<float> fractional{0.25f, -1.5f, 3e7f, 1e-20f, 0, 0, 0, 0, 0, 0, 0, 0};
  save_metaimage(ImageVolume(grid, fractional), dir.file("f.mha"), ElementType::Float);
  CHECK(load_metaimage(dir.file("f.mha")).data() == fractional);
}

TEST_CASE("save_mask payloads") {
  TempDir dir;
  const GridGeometry grid = balloon::testing::cube_grid(4);

  SUBCASE("empty mask is all zero bytes") {
    save_mask(BinaryMask(grid), dir.file("empty.mha"));
    const std::string bytes = read_bytes(dir.file("empty.mha"));
    CHECK(bytes.find("ElementType = MET_UCHAR") != std::string::npos);
    CHECK(bytes.substr(bytes.size() - 64) == std::string(64, '\0'));
  }
  SUBCASE("full mask is all 0x01") {
    BinaryMask full(grid, std::vector<std::uint8_t>(64, 1));
    save_mask(full, dir.file("full.mhd"));
    CHECK(read_bytes(dir.file("full.raw")) == std::string(64, '\x01'));
    CHECK(load_mask(dir.file("full.mhd")) == full);
  }
  SUBCASE("random 8^3 mask round-trips exactly") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const BinaryMask m = balloon::testing::random_mask(balloon::testing::cube_grid(8, {0.5, 0.7, 2.0}), rng);
      save_mask(m, dir.file("r.mha"));
      CHECK(load_mask(dir.file("r.mha")) == m);
    }
  }
}

TEST_CASE("sample_at_world uses the nearest voxel center") {
  GridGeometry grid{{8, 8, 8}, {0.5, 1.5, 2.0}, {3.0, -4.0, 1.0}};
  std::vector<float> data(grid.voxel_count());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-100, 100);
  for (auto& d : data) d = u(rng);
  const ImageVolume v(grid, data);

  SUBCASE("every voxel center returns its own scalar") {
    for (std::int64_t k = 0; k < 8; ++k)
      for (std::int64_t j = 0; j < 8; ++j)
        for (std::int64_t i = 0; i < 8; ++i) {
          const auto s = sample_at_world(v, grid.index_to_world(Index3{i, j, k}));
          REQUIRE(s.has_value());
          CHECK(*s == v.at(i, j, k));
        }
  }
  SUBCASE("points beyond the grid are outside") {
    CHECK_FALSE(sample_at_world(v, grid.index_to_world(Index3{7, 3, 3}) + Vec3{10, 0, 0}).has_value());
    CHECK_FALSE(sample_at_world(v, grid.index_to_world(Index3{0, 3, 3}) - Vec3{10, 0, 0}).has_value());
    CHECK_FALSE(sample_at_world(v, grid.index_to_world(Index3{3, 3, 7}) + Vec3{0, 0, 10}).has_value());
  }
  SUBCASE("offsets below half a spacing stay in the voxel") {
    // Rounding oracle: for |offset| < 0.5 spacing the nearest center is unchanged.
    const Index3 base{2, 3, 4};
    for (double fx : {-0.49, -0.25, 0.0, 0.25, 0.49})
      for (double fy : {-0.49, 0.0, 0.49})
        for (double fz : {-0.49, 0.3, 0.49}) {
          const Vec3 p = grid.index_to_world(base) + Vec3{fx * 0.5, fy * 1.5, fz * 2.0};
          CHECK(*sample_at_world(v, p) == v.at(base));
        }
    const Vec3 past = grid.index_to_world(base) + Vec3{0.51 * 0.5, 0, 0};
    CHECK(*sample_at_world(v, past) == v.at(3, 3, 4));
  }
}

TEST_CASE("index to world to index round-trips for in-grid indices") {
  GridGeometry grid{{7, 5, 9}, {0.3, 0.7, 1.9}, {0.1, -12.4, 3.3}};
  for (std::int64_t k = 0; k < 9; ++k)
    for (std::int64_t j = 0; j < 5; ++j)
      for (std::int64_t i = 0; i < 7; ++i) {
        const Index3 idx{i, j, k};
        CHECK(grid.nearest_index(grid.index_to_world(idx)) == idx);
      }
}

TEST_CASE("mean spacing is the geometric mean") {
  auto spacing = [](Vec3 s) { return mean_spacing(GridGeometry{{1, 1, 1}, s, {}}); };
  CHECK(spacing({1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spacing({1, 1, 8}) == doctest::Approx(2.0).epsilon(1e-15));
  const double via_logs = std::exp((std::log(0.5) + std::log(0.5) + std::log(3.0)) / 3.0);
  CHECK(spacing({0.5, 0.5, 3.0}) == doctest::Approx(via_logs).epsilon(1e-12));
  CHECK(spacing({0.5, 0.5, 3.0}) == doctest::Approx(0.908560296416).epsilon(1e-10));
}

TEST_CASE("volumes reject inconsistent construction") {
  CHECK_THROWS_AS(ImageVolume(GridGeometry{{2, 2, 2}, {1, 1, 1}, {}}, std::vector<float>(7)), Error);
  CHECK_THROWS_AS(ImageVolume(GridGeometry{{2, 2, 2}, {1, 0, 1}, {}}, 0.f), Error);
  CHECK_THROWS_AS(BinaryMask(GridGeometry{{0, 2, 2}, {1, 1, 1}, {}}), Error);
}
