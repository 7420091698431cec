#include "balloon/initializer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "balloon/error.hpp"

namespace balloon {

std::array<int, 2> in_plane_axes(SliceAxis axis) {
  switch (axis) {
    case SliceAxis::X: return {1, 2};
    case SliceAxis::Y: return {0, 2};
    case SliceAxis::Z: return {0, 1};
  }
  return {0, 1};
}

double contour_area(const InitContour& contour) {
  const auto& pts = contour.points;
  double twice = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    twice += a.u * b.v - b.u * a.v;
  }
  return 0.5 * twice;
}

namespace {

void validate_contour(const InitContour& contour, const GridGeometry& grid) {
  if (contour.points.size() < 3) {
    throw Error(ErrorCode::InvalidContour, "contour needs at least 3 points, got " +
                                               std::to_string(contour.points.size()));
  }
  for (const auto& p : contour.points) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
      throw Error(ErrorCode::InvalidContour, "contour point is not finite");
    }
  }
  const int axis = static_cast<int>(contour.slice_axis);
  if (contour.slice_index < 0 || contour.slice_index >= grid.dims[axis]) {
    throw Error(ErrorCode::InvalidContour, "slice_index " + std::to_string(contour.slice_index) +
                                               " outside [0, " + std::to_string(grid.dims[axis]) + ")");
  }
  if (std::abs(contour_area(contour)) < 1.0) {
    throw Error(ErrorCode::DegenerateContour, "degenerate contour: enclosed area below one pixel");
  }
}

}  // namespace

std::vector<PixelIndex> rasterize_contour(const InitContour& contour, const GridGeometry& grid) {
  validate_contour(contour, grid);
  const auto [au, av] = in_plane_axes(contour.slice_axis);
  const std::int64_t nu = grid.dims[au];
  const std::int64_t nv = grid.dims[av];
  const auto& pts = contour.points;

  double vmin = pts[0].v, vmax = pts[0].v;
  for (const auto& p : pts) {
    vmin = std::min(vmin, p.v);
    vmax = std::max(vmax, p.v);
  }
  const std::int64_t row_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(vmin)));
  const std::int64_t row_hi = std::min<std::int64_t>(nv - 1, static_cast<std::int64_t>(std::floor(vmax)));

  std::vector<PixelIndex> out;
  std::vector<double> crossings;
  for (std::int64_t row = row_lo; row <= row_hi; ++row) {
    const double y = static_cast<double>(row);
    crossings.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      // Half-open in v so a vertex lying exactly on the scanline is counted once.
      if ((a.v <= y && y < b.v) || (b.v <= y && y < a.v)) {
        crossings.push_back(a.u + (y - a.v) * (b.u - a.u) / (b.v - a.v));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    // Center u is inside iff an odd number of crossings lie strictly right of
    // it, i.e. crossings[2k] <= u < crossings[2k+1].
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const std::int64_t c0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(crossings[k])));
      std::int64_t c1 = static_cast<std::int64_t>(std::ceil(crossings[k + 1])) - 1;
      c1 = std::min<std::int64_t>(c1, nu - 1);
      for (std::int64_t col = c0; col <= c1; ++col) out.push_back({col, row});
    }
  }
  return out;
}

std::vector<ContourPoint> resample_contour(const InitContour& contour, double step) {
  const auto& pts = contour.points;
  std::vector<ContourPoint> out;
  if (pts.empty() || !(step > 0.0)) return out;
  double carried = 0.0;  // arc length from the last emitted sample to the current edge start
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    const double len = std::hypot(b.u - a.u, b.v - a.v);
    double s = (i == 0) ? 0.0 : step - carried;
    for (; s < len; s += step) {
      const double t = s / len;
      out.push_back({a.u + t * (b.u - a.u), a.v + t * (b.v - a.v)});
    }
    carried = len - (s - step);
  }
  return out;
}

Vec3 slice_point_to_world(const InitContour& contour, const GridGeometry& grid, double u, double v) {
  const auto [au, av] = in_plane_axes(contour.slice_axis);
  Vec3 idx;
  idx[static_cast<int>(contour.slice_axis)] = static_cast<double>(contour.slice_index);
  idx[au] = u;
  idx[av] = v;
  return grid.index_to_world(idx);
}

std::array<float, 2> trimmed_range(std::vector<float> sample, double trim) {
  if (sample.empty()) throw Error(ErrorCode::ContourTooSmall, "contour too small: no interior pixels");
  if (!(trim >= 0.0 && trim < 0.5)) {
    throw Error(ErrorCode::InvalidParams, "trim_percent must lie in [0, 0.5)");
  }
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double pn = trim * n;
  if (std::abs(pn - std::round(pn)) < 1e-9) pn = std::round(pn);
  // Nearest rank: lower = ceil(p n), upper = ceil((1 - p) n) = n - floor(p n), both 1-based.
  const auto lower_rank = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(pn)));
  const auto upper_rank = static_cast<std::int64_t>(sample.size()) - static_cast<std::int64_t>(std::floor(pn));
  return {sample[static_cast<std::size_t>(lower_rank - 1)], sample[static_cast<std::size_t>(upper_rank - 1)]};
}

SeedModel derive_seed(const InitContour& contour, const ImageVolume& volume, double trim_percent) {
  const GridGeometry& grid = volume.grid();
  const std::vector<PixelIndex> pixels = rasterize_contour(contour, grid);
  if (pixels.size() < 10) {
    throw Error(ErrorCode::ContourTooSmall,
                "contour too small: " + std::to_string(pixels.size()) + " interior pixels, need at least 10");
  }

  const auto [au, av] = in_plane_axes(contour.slice_axis);
  const int normal_axis = static_cast<int>(contour.slice_axis);
  double su = 0.0, sv = 0.0;
  std::vector<float> intensities;
  intensities.reserve(pixels.size());
  for (const auto& px : pixels) {
    su += static_cast<double>(px.u);
    sv += static_cast<double>(px.v);
    Index3 idx{};
    idx[normal_axis] = contour.slice_index;
    idx[au] = px.u;
    idx[av] = px.v;
    intensities.push_back(volume.at(idx));
  }
  const double cu = su / static_cast<double>(pixels.size());
  const double cv = sv / static_cast<double>(pixels.size());

  SeedModel seed;
  seed.center = slice_point_to_world(contour, grid, cu, cv);
  const auto range = trimmed_range(std::move(intensities), trim_percent);
  seed.intensity_min = range[0];
  seed.intensity_max = range[1];

  const auto dense = resample_contour(contour, 1.0);
  double total = 0.0;
  for (const auto& p : dense) total += norm(slice_point_to_world(contour, grid, p.u, p.v) - seed.center);
  seed.radius = total / static_cast<double>(dense.size());
  return seed;
}

}  // namespace balloon
