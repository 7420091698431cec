#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "balloon/geometry.hpp"
#include "balloon/volume.hpp"

namespace balloon {

enum class SliceAxis { X = 0, Y = 1, Z = 2 };

/// The two grid axes spanning a slice perpendicular to `axis`, in the order
/// used for contour coordinates: z-slices use (x, y), y-slices (x, z),
/// x-slices (y, z).
std::array<int, 2> in_plane_axes(SliceAxis axis);

struct ContourPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Closed polygon drawn on one slice, in continuous voxel coordinates of the
/// slice plane (pixel centers at integers). The last point connects back to
/// the first.
struct InitContour {
  SliceAxis slice_axis = SliceAxis::Z;
  std::int64_t slice_index = 0;
  std::vector<ContourPoint> points;
};

struct PixelIndex {
  std::int64_t u = 0;
  std::int64_t v = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// What the outline tells us about the lesion.
struct SeedModel {
  Vec3 center;               // mm
  float intensity_min = 0.f;
  float intensity_max = 0.f;
  double radius = 0.0;       // mm, mean center-to-boundary distance
};

/// Signed polygon area in pixel units (positive for counter-clockwise).
double contour_area(const InitContour& contour);

/// Slice pixels whose centers fall inside the polygon under the even-odd
/// rule, ordered by row (v) then column (u). Throws DegenerateContour when
/// the polygon encloses less than one pixel of area, InvalidContour when it
/// has fewer than three points or the slice lies outside the grid.
std::vector<PixelIndex> rasterize_contour(const InitContour& contour, const GridGeometry& grid);

/// Contour points resampled every `step` pixels of arc length, starting at
/// the first point.
std::vector<ContourPoint> resample_contour(const InitContour& contour, double step = 1.0);

/// World position of an in-plane continuous coordinate on the contour slice.
Vec3 slice_point_to_world(const InitContour& contour, const GridGeometry& grid, double u, double v);

/// Lower and upper nearest-rank quantiles at `trim` and `1 - trim` of an
/// unsorted sample.
std::array<float, 2> trimmed_range(std::vector<float> sample, double trim);

/// Center, trimmed intensity range and mean radius from the user outline.
/// Throws ContourTooSmall when fewer than 10 pixels are enclosed.
SeedModel derive_seed(const InitContour& contour, const ImageVolume& volume, double trim_percent = 0.02);

}  // namespace balloon
