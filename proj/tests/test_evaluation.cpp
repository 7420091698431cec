#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "balloon/error.hpp"
#include "balloon/evaluation.hpp"
#include "test_support.hpp"

using namespace balloon;
using namespace balloon::testing;

namespace {

const GridGeometry kCube8{{8, 8, 8}, {1, 1, 1}, {}};

/// Triple-loop oracle returning (|A|, |R|, |A ∩ R|).
std::array<std::size_t, 3> brute_counts(const BinaryMask& a, const BinaryMask& r) {
  std::array<std::size_t, 3> n{};
  const auto& d = a.grid().dims;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const bool x = a.at(i, j, k), y = r.at(i, j, k);
        n[0] += x;
        n[1] += y;
        n[2] += x && y;
      }
  return n;
}

BinaryMask mask_with(const GridGeometry& grid, std::initializer_list<Index3> on) {
  BinaryMask m(grid);
  for (const auto& idx : on) m.set(idx[0], idx[1], idx[2], true);
  return m;
}

}  // namespace

TEST_CASE("dsc reference values") {
  std::mt19937_64 rng(1);
  const BinaryMask a = random_mask(kCube8, rng, 0.3);
  CHECK(dsc(a, a) == 100.0);

  const BinaryMask left = mask_with(kCube8, {{0, 0, 0}, {1, 0, 0}});
  const BinaryMask right = mask_with(kCube8, {{7, 7, 7}});
  CHECK(dsc(left, right) == 0.0);

  const BinaryMask four_a = mask_with(kCube8, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  const BinaryMask four_r = mask_with(kCube8, {{2, 0, 0}, {3, 0, 0}, {4, 0, 0}, {5, 0, 0}});
  CHECK(dsc(four_a, four_r) == 50.0);
  CHECK(format_number(dsc(four_a, four_r)) == "50.0");
}

TEST_CASE("dsc equals the brute-force count on random pairs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> fill(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const BinaryMask a = random_mask(kCube8, rng, fill(rng));
    const BinaryMask r = random_mask(kCube8, rng, fill(rng));
    const auto [na, nr, both] = brute_counts(a, r);
    if (na + nr == 0) continue;
    const double expected = 100.0 * static_cast<double>(2 * both) / static_cast<double>(na + nr);
    CHECK(dsc(a, r) == expected);
    CHECK(dsc(r, a) == dsc(a, r));
    const EvalReport rep = compare(a, r);
    CHECK(rep.voxels_auto == na);
    CHECK(rep.voxels_ref == nr);
    CHECK(rep.dsc_percent >= 0.0);
    CHECK(rep.dsc_percent <= 100.0);
  }
}

TEST_CASE("dsc grows with the overlap when sizes are fixed") {
  // Slide a 16-voxel bar across another; overlap rises by one each step.
  const GridGeometry grid{{40, 1, 1}, {1, 1, 1}, {}};
  BinaryMask ref(grid);
  for (int i = 20; i < 36; ++i) ref.set(i, 0, 0, true);
  double previous = -1.0;
  for (int start = 0; start <= 20; ++start) {
    BinaryMask a(grid);
    for (int i = start; i < start + 16; ++i) a.set(i, 0, 0, true);
    const double d = dsc(a, ref);
    CHECK(d >= previous);
    previous = d;
  }
  CHECK(previous == 100.0);
}

TEST_CASE("dsc errors") {
  const BinaryMask empty(kCube8);
  try {
    (void)dsc(empty, empty);
    FAIL("expected UndefinedDsc");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UndefinedDsc);
  }
  const BinaryMask other(GridGeometry{{8, 8, 8}, {1, 1, 2}, {}});
  try {
    (void)dsc(empty, other);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
  CHECK_THROWS_AS((void)compare(empty, BinaryMask(GridGeometry{{8, 8, 8}, {1, 1, 1}, {0, 0, 1}})), Error);
  // One empty side is defined.
  CHECK(dsc(empty, mask_with(kCube8, {{1, 1, 1}})) == 0.0);
}

TEST_CASE("mask volumes") {
  const GridGeometry unit{{10, 10, 10}, {1, 1, 1}, {}};
  BinaryMask full(unit);
  for (int k = 0; k < 10; ++k)
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 10; ++i) full.set(i, j, k, true);
  CHECK(mask_volume_cm3(full) == 1.0);
  CHECK(format_number(mask_volume_cm3(full)) == "1.0");
  CHECK(mask_volume_cm3(BinaryMask(unit)) == 0.0);

  const GridGeometry fine{{100, 100, 10}, {0.5, 0.5, 0.75}, {}};
  BinaryMask small(fine);
  for (std::size_t n = 0; n < 4492; ++n) small.set(static_cast<std::int64_t>(n % 100), static_cast<std::int64_t>(n / 100), 0, true);
  CHECK(small.count() == 4492);
  CHECK(mask_volume_cm3(small) == doctest::Approx(0.84225).epsilon(1e-12));
  CHECK(std::round(mask_volume_cm3(small) * 1000.0) / 1000.0 == doctest::Approx(0.842));
}

TEST_CASE("mask volume is linear in the voxel count") {
  const GridGeometry grid{{16, 16, 16}, {0.7, 1.1, 2.3}, {}};
  const double voxel = 0.7 * 1.1 * 2.3 / 1000.0;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask m = random_mask(grid, rng, 0.02 * trial);
    CHECK(mask_volume_cm3(m) == doctest::Approx(static_cast<double>(m.count()) * voxel).epsilon(1e-12));
  }
}

TEST_CASE("compare fills every field") {
  std::mt19937_64 rng(4);
  const GridGeometry grid{{8, 8, 8}, {2, 2, 2}, {}};
  const BinaryMask a = random_mask(grid, rng, 0.4);
  const EvalReport same = compare(a, a);
  CHECK(same.dsc_percent == 100.0);
  CHECK(same.volume_auto_cm3 == same.volume_ref_cm3);
  CHECK(same.volume_auto_cm3 == doctest::Approx(static_cast<double>(a.count()) * 8.0 / 1000.0));
}

TEST_CASE("summaries use the population standard deviation") {
  const ColumnSummary two = summarize(std::vector<double>{70.0, 80.0});
  CHECK(two.mean == 75.0);
  CHECK(two.stddev == 5.0);
  CHECK(two.min == 70.0);
  CHECK(two.max == 80.0);
  const ColumnSummary one = summarize(std::vector<double>{63.74});
  CHECK(one.mean == 63.74);
  CHECK(one.stddev == 0.0);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> v(37);
  for (auto& x : v) x = u(rng);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const ColumnSummary s = summarize(v);
  CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(s.stddev == doctest::Approx(std::sqrt(ss / static_cast<double>(v.size()))).epsilon(1e-12));
}

TEST_CASE("number formatting") {
  CHECK(format_number(100.0) == "100.0");
  CHECK(format_number(0.0) == "0.0");
  CHECK(format_number(50.0) == "50.0");
  CHECK(format_number(0.84225) == "0.84225");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_number(2.0 / 7.0)) == 2.0 / 7.0);
}

TEST_CASE("batch CSV layout") {
  std::vector<BatchCase> cases{{"a", {70.0, 1.5, 2.0, 100, 200}}, {"b", {80.0, 2.5, 3.0, 300, 400}}};
  std::ostringstream out;
  write_batch_csv(out, cases);
  const std::string expected =
      "id,vol_auto,vol_ref,voxels_auto,voxels_ref,dsc\n"
      "a,1.5,2.0,100,200,70.0\n"
      "b,2.5,3.0,300,400,80.0\n"
      "min,1.5,2.0,100.0,200.0,70.0\n"
      "max,2.5,3.0,300.0,400.0,80.0\n"
      "mean,2.0,2.5,200.0,300.0,75.0\n"
      "std,0.5,0.5,100.0,100.0,5.0\n";
  CHECK(out.str() == expected);

  std::ostringstream none;
  write_batch_csv(none, {});
  CHECK(none.str() == csv_header() + "\n");
}
