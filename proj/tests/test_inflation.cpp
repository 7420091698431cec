#include <cmath>
#include <random>

#include "doctest.h"

#include "balloon/error.hpp"
#include "balloon/evaluation.hpp"
#include "balloon/inflation.hpp"
#include "balloon/json_io.hpp"
#include "balloon/phantom.hpp"
#include "mesh_fixtures.hpp"

using namespace balloon;
using namespace balloon::testing;

namespace {

VertexState state_with(const Vec3& direction, const Vec3& normal, double curvature) {
  VertexState s;
  s.direction = normalized(direction);
  s.normal = normalized(normal);
  s.curvature = curvature;
  s.radius = 1.0;
  return s;
}

InflationParams unit_params() {
  InflationParams p;
  p.base_step = 1.0;
  p.max_iterations = 100;
  p.convergence_eps = 0.01;
  return p;
}

const GridGeometry kGrid{{21, 21, 21}, {1, 1, 1}, {}};
const Vec3 kCenter{10, 10, 10};

}  // namespace

TEST_CASE("inflation speed examples") {
  const InflationParams p;
  CHECK(inflation_speed(state_with({1, 0, 0}, {1, 0, 0}, 0.0), p) == 1.0);
  CHECK(inflation_speed(state_with({1, 0, 0}, {0, 1, 0}, 0.0), p) == 0.0);
  CHECK(inflation_speed(state_with({1, 0, 0}, {0, 1, 0}, 5.0), p) == 0.0);
  CHECK(inflation_speed(state_with({1, 0, 0}, {-1, 0.2, 0}, 0.0), p) == 0.0);
  const double half = std::cos(std::acos(-1.0) / 3.0);
  CHECK(inflation_speed(state_with({1, 0, 0}, {half, std::sqrt(1 - half * half), 0}, 1.0), p) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("inflation speed matches a scalar evaluation and stays in [0, 1]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 2000; ++i) {
    InflationParams p;
    p.cosine_exponent = 3.0 * u(rng);
    p.curvature_gain = 4.0 * u(rng);
    const Vec3 d = random_direction(rng);
    const Vec3 n = random_direction(rng);
    const double kappa = u(rng);
    const double c = d.x * n.x + d.y * n.y + d.z * n.z;
    const double expected = c <= 0 ? 0.0 : std::pow(c, p.cosine_exponent) / (1.0 + p.curvature_gain * kappa);
    const double f = inflation_speed(state_with(d, n, kappa), p);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(f == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("move rejected outside the intensity range or the grid") {
  ImageVolume vol(kGrid, 100.f);
  const SeedModel seed{kCenter, 50.f, 80.f, 5.0};
  const InflationParams p = unit_params();
  VertexState s = state_with({0, 0, 1}, {0, 0, 1}, 0.0);
  s.recent_max_intensity = 60.0;
  const MoveResult r = try_move_vertex(s, kCenter, vol, seed, p, 1.0);
  CHECK(r.outcome == MoveOutcome::RejectedRange);
  CHECK(s.radius == 1.0);
  CHECK(s.recent_max_intensity == 60.0);
  CHECK(s.frozen);

  const SeedModel wide{kCenter, 0.f, 200.f, 5.0};
  s.radius = 10.2;  // destination beyond the last voxel center
  const MoveResult out = try_move_vertex(s, kCenter, vol, wide, p, 1.0);
  CHECK(out.outcome == MoveOutcome::RejectedRange);
  CHECK_FALSE(out.intensity.has_value());
  CHECK(s.radius == 10.2);
}

TEST_CASE("decaying memory trace: reject at 94 against 100, accept after one decay") {
  ImageVolume vol(kGrid, 94.f);
  const SeedModel seed{kCenter, 0.f, 200.f, 5.0};
  InflationParams p = unit_params();
  p.intensity_tolerance = 0.05;
  p.memory_decay = 0.95;
  VertexState s = state_with({1, 0, 0}, {1, 0, 0}, 0.0);
  s.recent_max_intensity = 100.0;

  const MoveResult first = try_move_vertex(s, kCenter, vol, seed, p, 1.0);
  CHECK(first.outcome == MoveOutcome::RejectedMemory);
  CHECK(s.radius == 1.0);
  CHECK(s.recent_max_intensity == doctest::Approx(95.0).epsilon(1e-15));

  const MoveResult second = try_move_vertex(s, kCenter, vol, seed, p, 1.0);
  CHECK(second.outcome == MoveOutcome::Accepted);
  CHECK(s.radius == 2.0);
  CHECK(s.recent_max_intensity == doctest::Approx(94.0));  // max(0.95 * 95, 94)
}

TEST_CASE("uniform interior: every move is accepted until the boundary") {
  ImageVolume vol(kGrid, 100.f);
  const SeedModel seed{kCenter, 90.f, 110.f, 8.0};
  const InflationParams p = unit_params();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    VertexState s = state_with(random_direction(rng), {1, 0, 0}, 0.0);
    s.radius = 0.5;
    s.recent_max_intensity = 100.0;
    for (int step = 0; step < 5; ++step) CHECK(try_move_vertex(s, kCenter, vol, seed, p, 1.0).outcome == MoveOutcome::Accepted);
    CHECK(s.radius == doctest::Approx(5.5));
  }
}

TEST_CASE("moves never shrink a radius and accepted moves land in range") {
  GridGeometry grid = kGrid;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> noise(0.f, 200.f);
  std::vector<float> data(grid.voxel_count());
  for (auto& v : data) v = noise(rng);
  const ImageVolume vol(grid, data);
  const SeedModel seed{kCenter, 40.f, 160.f, 8.0};
  const InflationParams p = unit_params();
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 5000; ++i) {
    VertexState s = state_with(random_direction(rng), {0, 0, 1}, 0.0);
    s.radius = 8.0 * u(rng);
    s.recent_max_intensity = 200.0 * u(rng);
    const double r0 = s.radius;
    const MoveResult m = try_move_vertex(s, kCenter, vol, seed, p, u(rng));
    CHECK(s.radius >= r0);
    if (m.outcome == MoveOutcome::Accepted) {
      REQUIRE(m.intensity.has_value());
      CHECK(*m.intensity >= seed.intensity_min);
      CHECK(*m.intensity <= seed.intensity_max);
    } else {
      CHECK(s.radius == r0);
    }
  }
}

TEST_CASE("params validation and resolved defaults") {
  const GridGeometry grid{{10, 10, 10}, {2, 2, 2}, {}};
  const SeedModel seed{{10, 10, 10}, 0.f, 1.f, 7.3};
  const InflationParams r = InflationParams{}.resolve(grid, seed);
  CHECK(*r.base_step == doctest::Approx(1.0));
  CHECK(*r.max_iterations == 15 + 50);  // ceil(2 * 7.3 / 1.0) + 50
  CHECK(*r.convergence_eps == doctest::Approx(0.02));

  auto rejects = [](auto mutate, const char* field) {
    InflationParams p;
    mutate(p);
    try {
      p.validate();
      FAIL("expected InvalidParams for " << field);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidParams);
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  rejects([](InflationParams& p) { p.split_factor = 0; }, "split_factor");
  rejects([](InflationParams& p) { p.smooth_lambda = 1.5; }, "smooth_lambda");
  rejects([](InflationParams& p) { p.trim_percent = 0.5; }, "trim_percent");
  rejects([](InflationParams& p) { p.memory_decay = -0.1; }, "memory_decay");
  rejects([](InflationParams& p) { p.max_iterations = 0; }, "max_iterations");
  rejects([](InflationParams& p) { p.convergence_window = 0; }, "convergence_window");
  rejects([](InflationParams& p) { p.base_step = -1.0; }, "base_step");
  InflationParams{}.validate();
}

TEST_CASE("params JSON round trip and unknown keys") {
  InflationParams p;
  p.base_step = 0.75;
  p.max_iterations = 12;
  p.smooth_lambda = 0.3;
  const InflationParams back = params_from_json(params_to_json(p));
  CHECK(*back.base_step == 0.75);
  CHECK(*back.max_iterations == 12);
  CHECK(back.smooth_lambda == 0.3);
  CHECK_FALSE(back.convergence_eps.has_value());
  try {
    (void)params_from_json(Json::parse(R"({"smooth_lamda": 0.2})"));
    FAIL("expected InvalidParams");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("smooth_lamda") != std::string::npos);
  }
}

TEST_CASE("segmentation of the sphere phantom") {
  PhantomSpec spec;
  const Phantom ph = generate_phantom(spec);
  const SeedModel seed = derive_seed(ph.suggested_contour, ph.volume);

  SUBCASE("a forced cap of one iteration runs exactly one body") {
    InflationParams p;
    p.max_iterations = 1;
    int iterations = 0;
    InflationObserver obs;
    obs.on_iteration = [&](const TriMesh&, std::int64_t) { ++iterations; };
    const SegmentationResult r = run_segmentation(ph.volume, seed, p, obs);
    CHECK(iterations == 1);
    CHECK(r.stats.iterations_run == 1);
    CHECK(r.stats.termination_reason == TerminationReason::MaxIterations);
  }
  SUBCASE("default run reaches the radius with high overlap") {
    int iterations = 0;
    InflationObserver obs;
    obs.on_iteration = [&](const TriMesh& mesh, std::int64_t it) {
      ++iterations;
      CHECK(it == iterations);
      CHECK(check_star_shape(mesh).max_direction_error < 1e-12);
    };
    const SegmentationResult r = run_segmentation(ph.volume, seed, {}, obs);
    CHECK(r.stats.termination_reason != TerminationReason::MaxIterations);
    CHECK(r.stats.iterations_run == iterations);
    CHECK(r.stats.iterations_run <= *InflationParams{}.resolve(ph.volume.grid(), seed).max_iterations);
    CHECK(r.stats.vertex_count == r.mesh.vertex_count());
    CHECK(r.stats.triangle_count == r.mesh.triangle_count());
    CHECK(r.stats.volume_cm3 == mask_volume_cm3(r.mask));
    if (r.stats.termination_reason == TerminationReason::RadiusReached) CHECK(r.stats.final_mean_radius >= seed.radius);
    CHECK(dsc(r.mask, ph.truth) >= 95.0);
  }
  SUBCASE("seed in the background is rejected before looping") {
    SeedModel bad = seed;
    bad.center = {3, 3, 3};
    try {
      (void)run_segmentation(ph.volume, bad);
      FAIL("expected SeedOutsideIntensityRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SeedOutsideIntensityRange);
    }
  }
  SUBCASE("identical inputs give identical meshes") {
    const SegmentationResult a = run_segmentation(ph.volume, seed);
    const SegmentationResult b = run_segmentation(ph.volume, seed);
    CHECK(to_obj(a.mesh) == to_obj(b.mesh));
    CHECK(a.mask == b.mask);
  }
}

TEST_CASE("widening the intensity gate never shrinks the noiseless sphere result") {
  const Phantom ph = generate_phantom(PhantomSpec{});
  const SeedModel seed = derive_seed(ph.suggested_contour, ph.volume);
  std::size_t previous = 0;
  for (float lo : {100.f, 90.f, 50.f, 0.f}) {
    SeedModel s = seed;
    s.intensity_min = lo;
    s.intensity_max = 200.f - lo;
    const std::size_t count = run_segmentation(ph.volume, s).mask.count();
    CHECK(count >= previous);
    previous = count;
  }
}

TEST_CASE("convergence ends a run that cannot reach its radius") {
  const Phantom ph = generate_phantom(PhantomSpec{});
  SeedModel seed = derive_seed(ph.suggested_contour, ph.volume);
  seed.radius = 40.0;  // larger than the object
  InflationParams p;
  p.max_iterations = 1000;
  const SegmentationResult r = run_segmentation(ph.volume, seed, p);
  CHECK(r.stats.termination_reason == TerminationReason::Converged);
  CHECK(r.stats.iterations_run < 1000);
  CHECK(r.stats.final_mean_radius < 40.0);
}
