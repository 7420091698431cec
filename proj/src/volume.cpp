#include "balloon/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "balloon/error.hpp"

namespace balloon {

Index3 GridGeometry::nearest_index(const Vec3& p) const {
  const Vec3 c = world_to_index(p);
  // lround would overflow on absurd coordinates; clamp first.
  auto round_axis = [](double v) {
    v = std::clamp(v, -1e15, 1e15);
    return static_cast<std::int64_t>(std::llround(v));
  };
  return {round_axis(c.x), round_axis(c.y), round_axis(c.z)};
}

void GridGeometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) {
      throw Error(ErrorCode::MalformedHeader, "grid dimension " + std::to_string(a) + " is not positive");
    }
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw Error(ErrorCode::MalformedHeader, "grid spacing " + std::to_string(a) + " is not strictly positive");
    }
  }
}

ImageVolume::ImageVolume(GridGeometry grid, std::vector<float> data)
    : grid_(std::move(grid)), data_(std::move(data)) {
  grid_.validate();
  if (data_.size() != grid_.voxel_count()) {
    throw Error(ErrorCode::GridMismatch, "volume data length " + std::to_string(data_.size()) +
                                             " does not match dims product " +
                                             std::to_string(grid_.voxel_count()));
  }
}

ImageVolume::ImageVolume(GridGeometry grid, float fill)
    : ImageVolume(grid, std::vector<float>(grid.voxel_count(), fill)) {}

BinaryMask::BinaryMask(GridGeometry grid) : grid_(std::move(grid)) {
  grid_.validate();
  bits_.assign(grid_.voxel_count(), 0);
}

BinaryMask::BinaryMask(GridGeometry grid, std::vector<std::uint8_t> bits)
    : grid_(std::move(grid)), bits_(std::move(bits)) {
  grid_.validate();
  if (bits_.size() != grid_.voxel_count()) {
    throw Error(ErrorCode::GridMismatch, "mask length does not match dims product");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::optional<float> sample_at_world(const ImageVolume& volume, const Vec3& p) {
  const Index3 idx = volume.grid().nearest_index(p);
  if (!volume.grid().contains(idx)) return std::nullopt;
  return volume.at(idx);
}

double mean_spacing(const GridGeometry& grid) {
  return std::cbrt(grid.spacing.x * grid.spacing.y * grid.spacing.z);
}

}  // namespace balloon
