#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "balloon/error.hpp"
#include "balloon/mesh.hpp"

namespace balloon {
namespace {

constexpr double kPi = std::numbers::pi;

// Triangles bucketed by the latitude/longitude cells their direction cone
// touches. A direction only needs testing against the triangles in its cell.
class DirectionBins {
 public:
  explicit DirectionBins(const TriMesh& mesh) {
    const auto tri_count = static_cast<double>(mesh.triangle_count());
    n_theta_ = std::clamp(static_cast<int>(std::sqrt(tri_count)), 8, 256);
    n_phi_ = 2 * n_theta_;
    cells_.assign(static_cast<std::size_t>(n_theta_ * n_phi_), {});

    for (std::uint32_t t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const Vec3 axis = normalized(mesh.vertex(tri[0]).direction + mesh.vertex(tri[1]).direction +
                                   mesh.vertex(tri[2]).direction);
      double cap = 0.0;
      for (auto v : tri) cap = std::max(cap, std::acos(std::clamp(dot(axis, mesh.vertex(v).direction), -1.0, 1.0)));
      cap += 1e-9;
      if (norm(axis) == 0.0 || cap >= 0.5 * kPi) {
        add_rect(t, 0.0, kPi, -kPi, kPi, true);
        continue;
      }
      const double theta = polar(axis);
      const double phi = azimuth(axis);
      const double lo = theta - cap, hi = theta + cap;
      if (lo <= 0.0 || hi >= kPi) {
        add_rect(t, std::max(lo, 0.0), std::min(hi, kPi), -kPi, kPi, true);
      } else {
        const double half = std::asin(std::min(1.0, std::sin(cap) / std::sin(theta))) + 1e-9;
        add_rect(t, lo, hi, phi - half, phi + half, false);
      }
    }
  }

  const std::vector<std::uint32_t>& candidates(const Vec3& dir) const {
    return cells_[static_cast<std::size_t>(theta_cell(polar(dir)) * n_phi_ + phi_cell(azimuth(dir)))];
  }

 private:
  static double polar(const Vec3& d) { return std::acos(std::clamp(d.z, -1.0, 1.0)); }
  static double azimuth(const Vec3& d) { return std::atan2(d.y, d.x); }

  int theta_cell(double theta) const {
    return std::clamp(static_cast<int>(std::floor(theta / kPi * n_theta_)), 0, n_theta_ - 1);
  }
  int phi_cell_unwrapped(double phi) const {
    return static_cast<int>(std::floor((phi + kPi) / (2.0 * kPi) * n_phi_));
  }
  int phi_cell(double phi) const { return std::clamp(phi_cell_unwrapped(phi), 0, n_phi_ - 1); }

  void add_rect(std::uint32_t t, double theta_lo, double theta_hi, double phi_lo, double phi_hi, bool all_phi) {
    int p0 = 0, p1 = n_phi_ - 1;
    if (!all_phi) {
      p0 = phi_cell_unwrapped(phi_lo);
      p1 = phi_cell_unwrapped(phi_hi);
      if (p1 - p0 + 1 >= n_phi_) {
        p0 = 0;
        p1 = n_phi_ - 1;
      }
    }
    for (int i = theta_cell(theta_lo); i <= theta_cell(theta_hi); ++i) {
      for (int j = p0; j <= p1; ++j) {
        const int wrapped = ((j % n_phi_) + n_phi_) % n_phi_;
        cells_[static_cast<std::size_t>(i * n_phi_ + wrapped)].push_back(t);
      }
    }
  }

  int n_theta_ = 8;
  int n_phi_ = 16;
  std::vector<std::vector<std::uint32_t>> cells_;
};

}  // namespace

BinaryMask voxelize(const TriMesh& mesh, const GridGeometry& grid) {
  BinaryMask mask(grid);
  if (mesh.vertex_count() == 0) return mask;

  const std::vector<Vec3> pos = mesh.positions();
  Vec3 lo = pos[0], hi = pos[0];
  for (const Vec3& p : pos) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  Index3 first{}, last{};
  for (int a = 0; a < 3; ++a) {
    const double i0 = (lo[a] - grid.origin[a]) / grid.spacing[a];
    const double i1 = (hi[a] - grid.origin[a]) / grid.spacing[a];
    first[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(std::max(i0, -1.0))));
    last[a] = std::min<std::int64_t>(grid.dims[a] - 1,
                                     static_cast<std::int64_t>(std::floor(std::min(i1, static_cast<double>(grid.dims[a])))));
    if (first[a] > last[a]) return mask;
  }

  const DirectionBins bins(mesh);
  const Vec3& center = mesh.center();
  constexpr double kConeTolerance = 1e-12;

  for (std::int64_t k = first[2]; k <= last[2]; ++k) {
    for (std::int64_t j = first[1]; j <= last[1]; ++j) {
      for (std::int64_t i = first[0]; i <= last[0]; ++i) {
        const Index3 idx{i, j, k};
        const Vec3 offset = grid.index_to_world(idx) - center;
        const double dist = norm(offset);
        if (dist == 0.0) {
          mask.set(idx, true);
          continue;
        }
        const Vec3 u = offset * (1.0 / dist);
        bool hit = false;
        double surface = 0.0;
        for (std::uint32_t t : bins.candidates(u)) {
          const auto& tri = mesh.triangles()[t];
          const Vec3& da = mesh.vertex(tri[0]).direction;
          const Vec3& db = mesh.vertex(tri[1]).direction;
          const Vec3& dc = mesh.vertex(tri[2]).direction;
          // Orientation about the center depends on the directions only, so
          // the cone test is independent of the current radii.
          if (triple(u, db, dc) < -kConeTolerance || triple(da, u, dc) < -kConeTolerance ||
              triple(da, db, u) < -kConeTolerance) {
            continue;
          }
          const Vec3 a = pos[tri[0]] - center;
          const Vec3 n = cross(pos[tri[1]] - pos[tri[0]], pos[tri[2]] - pos[tri[0]]);
          const double denom = dot(n, u);
          if (denom <= 0.0) continue;
          surface = dot(n, a) / denom;
          hit = true;
          break;
        }
        if (!hit) throw Error(ErrorCode::MeshNotWatertight, "mesh not watertight: a ray from the center meets no triangle");
        if (dist <= surface) mask.set(idx, true);
      }
    }
  }
  return mask;
}

}  // namespace balloon
