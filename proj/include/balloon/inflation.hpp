#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "balloon/initializer.hpp"
#include "balloon/mesh.hpp"
#include "balloon/volume.hpp"

namespace balloon {

/// Tuning knobs of the inflation loop. Fields left empty depend on the
/// volume or seed and are filled by resolve().
struct InflationParams {
  double split_factor = 2.95;                // edges longer than this many mean spacings are split
  std::optional<double> base_step;           // mm per iteration; default 0.5 * mean spacing
  double cosine_exponent = 1.0;
  double curvature_gain = 1.0;
  double smooth_lambda = 0.2;
  double trim_percent = 0.02;
  double intensity_tolerance = 0.05;
  double memory_decay = 0.95;
  std::optional<std::int64_t> max_iterations;  // default ceil(2 r / base_step) + 50
  std::optional<double> convergence_eps;       // mm; default 0.01 * mean spacing
  std::int64_t convergence_window = 5;
  double radius_stop_ratio = 1.0;

  /// Throws InvalidParams naming the first field out of range.
  void validate() const;

  /// Copy with every optional field filled in.
  InflationParams resolve(const GridGeometry& grid, const SeedModel& seed) const;
};

enum class TerminationReason { RadiusReached, Converged, MaxIterations };

std::string_view to_string(TerminationReason reason);

struct SegStats {
  std::int64_t iterations_run = 0;
  double final_mean_radius = 0.0;
  std::size_t vertex_count = 0;
  std::size_t triangle_count = 0;
  double volume_cm3 = 0.0;
  double wall_time = 0.0;  // seconds
  TerminationReason termination_reason = TerminationReason::MaxIterations;
};

/// max(0, cos phi)^p / (1 + g * kappa), cos phi = direction . normal.
double inflation_speed(const VertexState& state, const InflationParams& params);

enum class MoveOutcome {
  Accepted,
  RejectedRange,   // destination outside the grid or outside [I_min, I_max]
  RejectedMemory,  // destination darker than the vertex's recent maximum
};

struct MoveResult {
  MoveOutcome outcome = MoveOutcome::RejectedRange;
  Vec3 destination;
  std::optional<float> intensity;
};

/// Attempts one outward step of `speed * base_step` along the vertex
/// direction, applying the intensity gate and the decaying memory. `params`
/// must be resolved.
MoveResult try_move_vertex(VertexState& state, const Vec3& center, const ImageVolume& volume,
                           const SeedModel& seed, const InflationParams& params, double speed);

/// Optional instrumentation hooks; all may be empty.
struct InflationObserver {
  std::function<void(const TriMesh&)> on_seed;
  std::function<void(const TriMesh&)> on_split_pass;
  std::function<void(std::size_t vertex, const MoveResult&)> on_accepted_move;
  std::function<void(const TriMesh&, std::int64_t iteration)> on_iteration;
};

struct SegmentationResult {
  TriMesh mesh;
  BinaryMask mask;
  SegStats stats;
};

/// Grows a seed cube from seed.center until the mean vertex radius reaches
/// the seed radius, the surface stops moving, or the iteration cap is hit.
/// Throws SeedOutsideIntensityRange when the center voxel fails the gate.
SegmentationResult run_segmentation(const ImageVolume& volume, const SeedModel& seed,
                                    const InflationParams& params = {},
                                    const InflationObserver& observer = {});

}  // namespace balloon
