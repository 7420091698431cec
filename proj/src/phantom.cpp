#include "balloon/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "balloon/error.hpp"

namespace balloon {
namespace {

constexpr int kContourPoints = 24;

[[noreturn]] void reject(const std::string& message) { throw Error(ErrorCode::InvalidPhantomSpec, message); }

// Box-Muller over the raw 64-bit engine output, so the sequence does not
// depend on the standard library's distribution implementations.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(angle);
    has_spare_ = true;
    return mag * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double max_boundary_distance(const PhantomSpec& spec) {
  switch (spec.kind) {
    case PhantomKind::Sphere: return spec.radii[0];
    case PhantomKind::Ellipsoid: return std::max({spec.radii[0], spec.radii[1], spec.radii[2]});
    case PhantomKind::StarBlob: {
      double total = 0.0;
      for (const auto& h : spec.blob_harmonics) total += std::abs(h.amplitude);
      return spec.radii[0] * (1.0 + total);
    }
  }
  return spec.radii[0];
}

}  // namespace

void PhantomSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) reject("dims must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) reject("spacing must be positive");
  }
  const std::size_t expected = kind == PhantomKind::Ellipsoid ? 3 : 1;
  if (radii.size() != expected) {
    reject("radii needs " + std::to_string(expected) + " entries for this kind, got " + std::to_string(radii.size()));
  }
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) reject("radii must be positive");
  }
  double total = 0.0;
  for (const auto& h : blob_harmonics) {
    if (h.degree < 0 || h.degree > 64) reject("blob harmonic degree must lie in [0, 64]");
    if (!std::isfinite(h.amplitude)) reject("blob harmonic amplitude must be finite");
    total += std::abs(h.amplitude);
  }
  if (kind == PhantomKind::StarBlob && total >= 1.0) {
    reject("blob_harmonics total amplitude " + std::to_string(total) + " must be < 1");
  }
  if (fg_intensity == bg_intensity) reject("fg_intensity must differ from bg_intensity");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) reject("noise_sigma must be >= 0");
}

double boundary_distance(const PhantomSpec& spec, const Vec3& u) {
  switch (spec.kind) {
    case PhantomKind::Sphere: return spec.radii[0];
    case PhantomKind::Ellipsoid: {
      const double q = (u.x / spec.radii[0]) * (u.x / spec.radii[0]) + (u.y / spec.radii[1]) * (u.y / spec.radii[1]) +
                       (u.z / spec.radii[2]) * (u.z / spec.radii[2]);
      return 1.0 / std::sqrt(q);
    }
    case PhantomKind::StarBlob: {
      const std::complex<double> planar(u.x, u.y);
      double factor = 1.0;
      for (const auto& h : spec.blob_harmonics) factor += h.amplitude * std::pow(planar, h.degree).real();
      return spec.radii[0] * factor;
    }
  }
  return spec.radii[0];
}

bool phantom_contains(const PhantomSpec& spec, const Vec3& p) {
  const Vec3 d = p - spec.center;
  const double dist = norm(d);
  if (dist == 0.0) return true;
  return dist <= boundary_distance(spec, d * (1.0 / dist));
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const GridGeometry grid = spec.grid();
  BinaryMask truth(grid);
  std::vector<float> data(grid.voxel_count());
  GaussianSource noise(spec.rng_seed);

  std::size_t linear = 0;
  for (std::int64_t k = 0; k < grid.dims[2]; ++k) {
    for (std::int64_t j = 0; j < grid.dims[1]; ++j) {
      for (std::int64_t i = 0; i < grid.dims[0]; ++i, ++linear) {
        const Index3 idx{i, j, k};
        const bool inside = phantom_contains(spec, grid.index_to_world(idx));
        truth.set(idx, inside);
        double value = inside ? spec.fg_intensity : spec.bg_intensity;
        if (spec.noise_sigma > 0.0) value += spec.noise_sigma * noise.next();
        data[linear] = static_cast<float>(value);
      }
    }
  }

  InitContour contour;
  contour.slice_axis = SliceAxis::Z;
  contour.slice_index = grid.nearest_index(spec.center)[2];
  if (contour.slice_index < 0 || contour.slice_index >= grid.dims[2]) reject("phantom center lies outside the grid");
  const double slice_z = grid.index_to_world(Index3{0, 0, contour.slice_index}).z;
  const double reach = max_boundary_distance(spec) * 1.01 + 1e-9;
  for (int n = 0; n < kContourPoints; ++n) {
    const double angle = 2.0 * std::numbers::pi * n / kContourPoints;
    const Vec3 dir{std::cos(angle), std::sin(angle), 0.0};
    auto at = [&](double s) { return Vec3{spec.center.x, spec.center.y, slice_z} + s * dir; };
    if (!phantom_contains(spec, at(0.0))) reject("central slice does not cut the phantom");
    double lo = 0.0, hi = reach;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phantom_contains(spec, at(mid)) ? lo : hi) = mid;
    }
    const Vec3 idx = grid.world_to_index(at(lo));
    contour.points.push_back({idx.x, idx.y});
  }
  return {ImageVolume(grid, std::move(data)), std::move(truth), std::move(contour)};
}

}  // namespace balloon
