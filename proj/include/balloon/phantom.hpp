#pragma once

#include <cstdint>
#include <vector>

#include "balloon/initializer.hpp"
#include "balloon/volume.hpp"

namespace balloon {

enum class PhantomKind { Sphere, Ellipsoid, StarBlob };

/// Radial perturbation Re((u_x + i u_y)^degree) = sin^degree(theta) cos(degree phi),
/// scaled by `amplitude` (a fraction of the base radius).
struct BlobHarmonic {
  int degree = 0;
  double amplitude = 0.0;
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::Sphere;
  std::array<std::int64_t, 3> dims{64, 64, 64};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 center{32.0, 32.0, 32.0};  // mm
  std::vector<double> radii{15.0};  // 1 entry for sphere and star_blob, 3 for ellipsoid
  std::vector<BlobHarmonic> blob_harmonics;
  float fg_intensity = 100.f;
  float bg_intensity = 0.f;
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 1;

  /// Throws InvalidPhantomSpec naming the offending field.
  void validate() const;
  GridGeometry grid() const { return {dims, spacing, origin}; }
};

/// Distance from the phantom center to its boundary along unit `direction`.
double boundary_distance(const PhantomSpec& spec, const Vec3& direction);

/// Analytic inside test for a world point.
bool phantom_contains(const PhantomSpec& spec, const Vec3& p);

struct Phantom {
  ImageVolume volume;
  BinaryMask truth;
  InitContour suggested_contour;  // 24-point boundary polygon on the central z slice
};

/// Pure function of `spec`. Noise is additive Gaussian drawn in voxel order
/// from std::mt19937_64 seeded with rng_seed, through the Box-Muller transform.
Phantom generate_phantom(const PhantomSpec& spec);

}  // namespace balloon
