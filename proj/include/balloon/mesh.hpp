#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "balloon/geometry.hpp"
#include "balloon/volume.hpp"

namespace balloon {

/// Per-vertex state of a star-shaped mesh. The position is always
/// center + radius * direction; the direction never changes after creation.
struct VertexState {
  Vec3 direction;            // unit, from the star center
  double radius = 0.0;       // mm
  Vec3 normal;               // unit after recompute_normals_and_curvature
  double curvature = 0.0;    // dimensionless umbrella magnitude
  double recent_max_intensity = 0.0;
  bool frozen = false;       // move rejected during the current iteration
};

using Triangle = std::array<std::uint32_t, 3>;

/// Closed, outward-wound triangle mesh that is star-shaped about a fixed
/// center. Triangles are indices into vertices(); 1-ring adjacency is kept in
/// sync by every structural edit.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(Vec3 center, std::vector<VertexState> vertices, std::vector<Triangle> triangles);

  /// Builds vertex states from absolute positions. Throws MeshNotWatertight
  /// when a position coincides with the center.
  static TriMesh from_positions(const Vec3& center, std::span<const Vec3> positions,
                                std::vector<Triangle> triangles);

  const Vec3& center() const { return center_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  const std::vector<VertexState>& vertices() const { return vertices_; }
  std::vector<VertexState>& vertices() { return vertices_; }
  const VertexState& vertex(std::size_t i) const { return vertices_[i]; }
  VertexState& vertex(std::size_t i) { return vertices_[i]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::span<const std::uint32_t> neighbors(std::size_t i) const { return rings_[i]; }

  Vec3 position(std::size_t i) const { return center_ + vertices_[i].radius * vertices_[i].direction; }
  std::vector<Vec3> positions() const;

  double mean_radius() const;

  using PassObserver = std::function<void(const TriMesh&)>;

  /// Midpoint-splits every edge longer than `threshold` (mm), longest first,
  /// repeating for at most 16 passes. Returns the number of splits. Throws
  /// SplitDidNotConverge when edges are still too long after the last pass or
  /// the mesh would grow past 2^22 vertices.
  std::size_t split_long_edges(double threshold, const PassObserver& after_pass = {});

 private:
  void rebuild_rings();

  Vec3 center_;
  std::vector<VertexState> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::vector<std::uint32_t>> rings_;
};

/// Axis-aligned cube of side `edge_length` around `center`, 8 vertices and
/// 12 triangles.
TriMesh make_seed_cube(const Vec3& center, double edge_length);

inline std::size_t split_long_edges(TriMesh& mesh, double threshold,
                                    const TriMesh::PassObserver& after_pass = {}) {
  return mesh.split_long_edges(threshold, after_pass);
}

/// Area-weighted vertex normals and the 1-ring umbrella curvature
/// |mean(ring) - p| / (2 * mean |ring - p|).
void recompute_normals_and_curvature(TriMesh& mesh);

/// radius <- (1 - lambda) radius + lambda * mean(ring radii), all vertices at once.
void radial_smooth(TriMesh& mesh, double lambda);

/// Voxel centers whose distance to the mesh center does not exceed the
/// surface's radial distance in that direction. Only the mesh bounding box is
/// visited. Throws MeshNotWatertight when a ray meets no triangle.
BinaryMask voxelize(const TriMesh& mesh, const GridGeometry& grid);

// Structural checks used by tests and the acceptance suite.

struct ManifoldReport {
  bool closed = false;        // every undirected edge has exactly two triangles
  bool oriented = false;      // every directed edge occurs once
  std::size_t edge_count = 0;
  long euler_characteristic = 0;
};

ManifoldReport check_manifold(const TriMesh& mesh);

/// Volume enclosed by the triangle fan about the center (positive when
/// outward-wound).
double signed_fan_volume(const TriMesh& mesh);

/// Number of triangles hit by the ray center + t * direction, t > 0.
/// Brute force over all triangles, independent of voxelize.
std::size_t count_ray_crossings(const TriMesh& mesh, const Vec3& direction);

struct StarReport {
  double max_direction_error = 0.0;  // max | |direction| - 1 |
  bool radii_positive = true;
};

StarReport check_star_shape(const TriMesh& mesh);

// Export.

std::string to_obj(const TriMesh& mesh);
std::string to_binary_stl(const TriMesh& mesh);
void save_mesh(const TriMesh& mesh, const std::string& path);  // format from extension (.obj / .stl)

}  // namespace balloon
