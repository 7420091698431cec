#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "balloon/geometry.hpp"

namespace balloon {

using Index3 = std::array<std::int64_t, 3>;

/// Shape and placement of a voxel grid. Voxel centers sit at
/// origin + index ⊙ spacing.
struct GridGeometry {
  std::array<std::int64_t, 3> dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  bool contains(const Index3& idx) const {
    return idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 && idx[0] < dims[0] && idx[1] < dims[1] &&
           idx[2] < dims[2];
  }

  std::size_t linear(const Index3& idx) const {
    return static_cast<std::size_t>(idx[0] + dims[0] * (idx[1] + dims[1] * idx[2]));
  }

  Vec3 index_to_world(const Vec3& continuous_index) const {
    return origin + hadamard(continuous_index, spacing);
  }
  Vec3 index_to_world(const Index3& idx) const {
    return index_to_world(Vec3{static_cast<double>(idx[0]), static_cast<double>(idx[1]),
                               static_cast<double>(idx[2])});
  }
  Vec3 world_to_index(const Vec3& p) const {
    return {(p.x - origin.x) / spacing.x, (p.y - origin.y) / spacing.y, (p.z - origin.z) / spacing.z};
  }
  /// Nearest voxel center (may be outside the grid).
  Index3 nearest_index(const Vec3& p) const;

  double voxel_volume_mm3() const { return spacing.x * spacing.y * spacing.z; }

  /// Throws when a dimension is not positive or a spacing not strictly positive.
  void validate() const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Scalar volume, float storage, x-fastest layout. Immutable once built.
class ImageVolume {
 public:
  ImageVolume() = default;
  ImageVolume(GridGeometry grid, std::vector<float> data);
  /// Volume filled with a constant.
  ImageVolume(GridGeometry grid, float fill);

  const GridGeometry& grid() const { return grid_; }
  const std::vector<float>& data() const { return data_; }

  float at(const Index3& idx) const { return data_[grid_.linear(idx)]; }
  float at(std::int64_t i, std::int64_t j, std::int64_t k) const { return at(Index3{i, j, k}); }

 private:
  GridGeometry grid_;
  std::vector<float> data_;
};

/// One occupancy flag per voxel on a grid shared with an ImageVolume.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(GridGeometry grid);
  BinaryMask(GridGeometry grid, std::vector<std::uint8_t> bits);

  const GridGeometry& grid() const { return grid_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool at(const Index3& idx) const { return bits_[grid_.linear(idx)] != 0; }
  bool at(std::int64_t i, std::int64_t j, std::int64_t k) const { return at(Index3{i, j, k}); }
  void set(const Index3& idx, bool inside) { bits_[grid_.linear(idx)] = inside ? 1 : 0; }
  void set(std::int64_t i, std::int64_t j, std::int64_t k, bool inside) { set(Index3{i, j, k}, inside); }

  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  GridGeometry grid_;
  std::vector<std::uint8_t> bits_;
};

/// Nearest-voxel lookup. std::nullopt marks a point whose nearest voxel lies
/// outside the grid.
std::optional<float> sample_at_world(const ImageVolume& volume, const Vec3& p);

/// Geometric mean of the three spacings.
double mean_spacing(const GridGeometry& grid);
inline double mean_spacing(const ImageVolume& volume) { return mean_spacing(volume.grid()); }

}  // namespace balloon
