#include "balloon/inflation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <string>

#include "balloon/error.hpp"
#include "balloon/evaluation.hpp"

namespace balloon {
namespace {

void require(bool ok, const char* field, const char* range) {
  if (!ok) throw Error(ErrorCode::InvalidParams, std::string("parameter ") + field + " must be " + range);
}

}  // namespace

void InflationParams::validate() const {
  require(split_factor > 0.0 && std::isfinite(split_factor), "split_factor", "> 0");
  require(!base_step || (*base_step > 0.0 && std::isfinite(*base_step)), "base_step", "> 0");
  require(cosine_exponent >= 0.0 && std::isfinite(cosine_exponent), "cosine_exponent", ">= 0");
  require(curvature_gain >= 0.0 && std::isfinite(curvature_gain), "curvature_gain", ">= 0");
  require(smooth_lambda >= 0.0 && smooth_lambda <= 1.0, "smooth_lambda", "in [0, 1]");
  require(trim_percent >= 0.0 && trim_percent < 0.5, "trim_percent", "in [0, 0.5)");
  require(intensity_tolerance >= 0.0 && intensity_tolerance <= 1.0, "intensity_tolerance", "in [0, 1]");
  require(memory_decay >= 0.0 && memory_decay <= 1.0, "memory_decay", "in [0, 1]");
  require(!max_iterations || *max_iterations >= 1, "max_iterations", ">= 1");
  require(!convergence_eps || (*convergence_eps >= 0.0 && std::isfinite(*convergence_eps)), "convergence_eps", ">= 0");
  require(convergence_window >= 1, "convergence_window", ">= 1");
  require(radius_stop_ratio > 0.0 && std::isfinite(radius_stop_ratio), "radius_stop_ratio", "> 0");
}

InflationParams InflationParams::resolve(const GridGeometry& grid, const SeedModel& seed) const {
  validate();
  InflationParams out = *this;
  const double spacing = mean_spacing(grid);
  if (!out.base_step) out.base_step = 0.5 * spacing;
  if (!out.max_iterations) {
    out.max_iterations = static_cast<std::int64_t>(std::ceil(2.0 * seed.radius / *out.base_step)) + 50;
  }
  if (!out.convergence_eps) out.convergence_eps = 0.01 * spacing;
  return out;
}

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::RadiusReached: return "radius_reached";
    case TerminationReason::Converged: return "converged";
    case TerminationReason::MaxIterations: return "max_iterations";
  }
  return "max_iterations";
}

double inflation_speed(const VertexState& state, const InflationParams& params) {
  const double cosine = std::max(0.0, dot(state.direction, state.normal));
  if (cosine == 0.0) return 0.0;
  const double orientation = params.cosine_exponent == 0.0 ? 1.0 : std::pow(cosine, params.cosine_exponent);
  const double curvature = std::max(0.0, state.curvature);
  return std::clamp(orientation / (1.0 + params.curvature_gain * curvature), 0.0, 1.0);
}

MoveResult try_move_vertex(VertexState& state, const Vec3& center, const ImageVolume& volume,
                           const SeedModel& seed, const InflationParams& params, double speed) {
  const double step = speed * params.base_step.value_or(0.5 * mean_spacing(volume));
  MoveResult result;
  result.destination = center + (state.radius + step) * state.direction;
  result.intensity = sample_at_world(volume, result.destination);

  if (!result.intensity || *result.intensity < seed.intensity_min || *result.intensity > seed.intensity_max) {
    result.outcome = MoveOutcome::RejectedRange;
    state.frozen = true;
    return result;
  }
  const double intensity = *result.intensity;
  if (intensity >= (1.0 - params.intensity_tolerance) * state.recent_max_intensity) {
    result.outcome = MoveOutcome::Accepted;
    state.radius += step;
    state.recent_max_intensity = std::max(params.memory_decay * state.recent_max_intensity, intensity);
    return result;
  }
  result.outcome = MoveOutcome::RejectedMemory;
  state.frozen = true;
  state.recent_max_intensity *= params.memory_decay;
  return result;
}

SegmentationResult run_segmentation(const ImageVolume& volume, const SeedModel& seed,
                                    const InflationParams& params, const InflationObserver& observer) {
  const auto started = std::chrono::steady_clock::now();
  if (!(seed.radius > 0.0) || seed.intensity_min > seed.intensity_max) {
    throw Error(ErrorCode::InvalidParams, "seed model needs radius > 0 and intensity_min <= intensity_max");
  }
  const InflationParams p = params.resolve(volume.grid(), seed);
  const auto center_intensity = sample_at_world(volume, seed.center);
  if (!center_intensity || *center_intensity < seed.intensity_min || *center_intensity > seed.intensity_max) {
    throw Error(ErrorCode::SeedOutsideIntensityRange, "seed outside intensity range: center voxel intensity " +
                                                          (center_intensity ? std::to_string(*center_intensity)
                                                                            : std::string("outside grid")) +
                                                          " not in [" + std::to_string(seed.intensity_min) + ", " +
                                                          std::to_string(seed.intensity_max) + "]");
  }

  const double spacing = mean_spacing(volume);
  const double split_threshold = p.split_factor * spacing;
  TriMesh mesh = make_seed_cube(seed.center, spacing);
  for (auto& v : mesh.vertices()) v.recent_max_intensity = *center_intensity;
  if (observer.on_seed) observer.on_seed(mesh);

  SegStats stats;
  std::deque<double> recent_changes;
  std::vector<double> before;
  for (std::int64_t iteration = 1;; ++iteration) {
    mesh.split_long_edges(split_threshold, observer.on_split_pass);
    recompute_normals_and_curvature(mesh);

    before.resize(mesh.vertex_count());
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) before[i] = mesh.vertex(i).radius;

    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      VertexState& state = mesh.vertex(i);
      state.frozen = false;
      const double speed = inflation_speed(state, p);
      const MoveResult move = try_move_vertex(state, mesh.center(), volume, seed, p, speed);
      if (move.outcome == MoveOutcome::Accepted && observer.on_accepted_move) observer.on_accepted_move(i, move);
    }
    radial_smooth(mesh, p.smooth_lambda);

    double max_change = 0.0;
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      max_change = std::max(max_change, std::abs(mesh.vertex(i).radius - before[i]));
    }
    recent_changes.push_back(max_change);
    if (recent_changes.size() > static_cast<std::size_t>(p.convergence_window)) recent_changes.pop_front();

    stats.iterations_run = iteration;
    if (observer.on_iteration) observer.on_iteration(mesh, iteration);

    if (mesh.mean_radius() >= p.radius_stop_ratio * seed.radius) {
      stats.termination_reason = TerminationReason::RadiusReached;
      break;
    }
    if (recent_changes.size() == static_cast<std::size_t>(p.convergence_window) &&
        std::all_of(recent_changes.begin(), recent_changes.end(),
                    [&](double c) { return c < *p.convergence_eps; })) {
      stats.termination_reason = TerminationReason::Converged;
      break;
    }
    if (iteration >= *p.max_iterations) {
      stats.termination_reason = TerminationReason::MaxIterations;
      break;
    }
  }

  BinaryMask mask = voxelize(mesh, volume.grid());
  stats.final_mean_radius = mesh.mean_radius();
  stats.vertex_count = mesh.vertex_count();
  stats.triangle_count = mesh.triangle_count();
  stats.volume_cm3 = mask_volume_cm3(mask);
  stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(mesh), std::move(mask), stats};
}

}  // namespace balloon
