#include "balloon/mesh.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <tuple>
#include <unordered_map>

#include "balloon/error.hpp"

namespace balloon {
namespace {

constexpr int kMaxSplitPasses = 16;
// Upper bound on mesh size; a threshold far below the grid scale would
// otherwise quadruple the triangle count every pass until memory runs out.
constexpr std::size_t kMaxSplitVertices = std::size_t{1} << 22;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// The (up to) two triangles sharing an undirected edge.
struct EdgeFaces {
  std::array<std::uint32_t, 2> tri{};
  int count = 0;

  void add(std::uint32_t t) {
    if (count < 2) tri[count] = t;
    ++count;
  }
  void replace(std::uint32_t from, std::uint32_t to) {
    for (int i = 0; i < std::min(count, 2); ++i) {
      if (tri[i] == from) {
        tri[i] = to;
        return;
      }
    }
    assert(false && "edge does not reference triangle");
  }
};

using EdgeMap = std::unordered_map<std::uint64_t, EdgeFaces>;

EdgeMap build_edge_map(const std::vector<Triangle>& triangles) {
  EdgeMap edges;
  edges.reserve(triangles.size() * 2);
  for (std::uint32_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (int e = 0; e < 3; ++e) edges[edge_key(tri[e], tri[(e + 1) % 3])].add(t);
  }
  return edges;
}

// Rotates `tri` so that its directed edge between a and b comes first.
Triangle rotate_to_edge(const Triangle& tri, std::uint32_t a, std::uint32_t b) {
  for (int e = 0; e < 3; ++e) {
    const std::uint32_t x = tri[e], y = tri[(e + 1) % 3];
    if ((x == a && y == b) || (x == b && y == a)) return {x, y, tri[(e + 2) % 3]};
  }
  assert(false && "triangle does not contain edge");
  return tri;
}

}  // namespace

TriMesh::TriMesh(Vec3 center, std::vector<VertexState> vertices, std::vector<Triangle> triangles)
    : center_(center), vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (const auto& tri : triangles_) {
    for (auto v : tri) {
      if (v >= vertices_.size()) throw Error(ErrorCode::MeshNotWatertight, "triangle references missing vertex");
    }
  }
  rebuild_rings();
}

TriMesh TriMesh::from_positions(const Vec3& center, std::span<const Vec3> positions,
                                std::vector<Triangle> triangles) {
  std::vector<VertexState> states;
  states.reserve(positions.size());
  for (const Vec3& p : positions) {
    const Vec3 d = p - center;
    const double r = norm(d);
    if (!(r > 0.0)) throw Error(ErrorCode::MeshNotWatertight, "vertex coincides with the star center");
    VertexState s;
    s.direction = d * (1.0 / r);
    s.radius = r;
    s.normal = s.direction;
    states.push_back(s);
  }
  return TriMesh(center, std::move(states), std::move(triangles));
}

std::vector<Vec3> TriMesh::positions() const {
  std::vector<Vec3> out;
  out.reserve(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) out.push_back(position(i));
  return out;
}

double TriMesh::mean_radius() const {
  if (vertices_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : vertices_) sum += v.radius;
  return sum / static_cast<double>(vertices_.size());
}

void TriMesh::rebuild_rings() {
  rings_.assign(vertices_.size(), {});
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      rings_[tri[e]].push_back(tri[(e + 1) % 3]);
      rings_[tri[e]].push_back(tri[(e + 2) % 3]);
    }
  }
  for (auto& ring : rings_) {
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  }
}

std::size_t TriMesh::split_long_edges(double threshold, const PassObserver& after_pass) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidParams, "split threshold must be positive");

  struct LongEdge {
    double length;
    std::uint32_t a, b;
  };

  std::size_t total_splits = 0;
  for (int pass = 0; pass <= kMaxSplitPasses; ++pass) {
    std::vector<LongEdge> long_edges;
    for (const auto& tri : triangles_) {
      for (int e = 0; e < 3; ++e) {
        const std::uint32_t a = tri[e], b = tri[(e + 1) % 3];
        if (a > b) continue;  // each undirected edge appears once with a < b
        const double len = norm(position(a) - position(b));
        if (len > threshold) long_edges.push_back({len, a, b});
      }
    }
    if (long_edges.empty()) return total_splits;
    if (pass == kMaxSplitPasses) {
      throw Error(ErrorCode::SplitDidNotConverge,
                  "split did not converge: " + std::to_string(long_edges.size()) + " edges still longer than " +
                      std::to_string(threshold) + " mm after " + std::to_string(kMaxSplitPasses) + " passes");
    }
    if (vertices_.size() + long_edges.size() > kMaxSplitVertices) {
      throw Error(ErrorCode::SplitDidNotConverge,
                  "split did not converge: " + std::to_string(long_edges.size()) + " edges still longer than " +
                      std::to_string(threshold) + " mm would exceed " + std::to_string(kMaxSplitVertices) +
                      " vertices");
    }
    std::sort(long_edges.begin(), long_edges.end(), [](const LongEdge& l, const LongEdge& r) {
      return std::tie(r.length, l.a, l.b) < std::tie(l.length, r.a, r.b);
    });

    EdgeMap edges = build_edge_map(triangles_);
    for (const LongEdge& edge : long_edges) {
      auto it = edges.find(edge_key(edge.a, edge.b));
      if (it == edges.end() || it->second.count != 2) {
        throw Error(ErrorCode::MeshNotWatertight, "edge split on a non-manifold edge");
      }
      const EdgeFaces faces = it->second;
      edges.erase(it);

      const VertexState& va = vertices_[edge.a];
      const VertexState& vb = vertices_[edge.b];
      const Vec3 mid = 0.5 * (position(edge.a) + position(edge.b));
      const Vec3 offset = mid - center_;
      const double r = norm(offset);
      if (!(r > 0.0)) throw Error(ErrorCode::MeshNotWatertight, "edge midpoint coincides with the star center");
      VertexState m;
      m.direction = offset * (1.0 / r);
      m.radius = r;
      m.normal = normalized(va.normal + vb.normal);
      m.curvature = 0.5 * (va.curvature + vb.curvature);
      m.recent_max_intensity = std::max(va.recent_max_intensity, vb.recent_max_intensity);
      const auto mi = static_cast<std::uint32_t>(vertices_.size());
      vertices_.push_back(m);

      for (int side = 0; side < 2; ++side) {
        const std::uint32_t t = faces.tri[side];
        const auto [x, y, z] = rotate_to_edge(triangles_[t], edge.a, edge.b);
        const auto n = static_cast<std::uint32_t>(triangles_.size());
        triangles_[t] = {x, mi, z};
        triangles_.push_back({mi, y, z});
        edges[edge_key(x, mi)].add(t);
        edges[edge_key(mi, y)].add(n);
        auto& mz = edges[edge_key(mi, z)];
        mz.add(t);
        mz.add(n);
        edges[edge_key(y, z)].replace(t, n);
      }
      ++total_splits;
    }
    rebuild_rings();
    if (after_pass) after_pass(*this);
  }
  return total_splits;
}

TriMesh make_seed_cube(const Vec3& center, double edge_length) {
  if (!(edge_length > 0.0)) throw Error(ErrorCode::InvalidParams, "seed cube edge must be positive");
  const double h = 0.5 * edge_length;
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) {
    corners.push_back(center + Vec3{(i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h});
  }
  // Faces as corner quads; winding is fixed up below so normals point outward.
  const std::array<std::array<std::uint32_t, 4>, 6> quads{{
      {0, 2, 6, 4}, {1, 3, 7, 5},  // -x, +x
      {0, 1, 5, 4}, {2, 3, 7, 6},  // -y, +y
      {0, 1, 3, 2}, {4, 5, 7, 6},  // -z, +z
  }};
  std::vector<Triangle> triangles;
  for (const auto& q : quads) {
    for (const Triangle& tri : {Triangle{q[0], q[1], q[2]}, Triangle{q[0], q[2], q[3]}}) {
      const Vec3 a = corners[tri[0]], b = corners[tri[1]], c = corners[tri[2]];
      const Vec3 centroid = (a + b + c) * (1.0 / 3.0) - center;
      if (dot(cross(b - a, c - a), centroid) > 0.0) {
        triangles.push_back(tri);
      } else {
        triangles.push_back({tri[0], tri[2], tri[1]});
      }
    }
  }
  return TriMesh::from_positions(center, corners, std::move(triangles));
}

void recompute_normals_and_curvature(TriMesh& mesh) {
  const std::vector<Vec3> pos = mesh.positions();
  std::vector<Vec3> accum(pos.size());
  for (const auto& tri : mesh.triangles()) {
    const Vec3 n = cross(pos[tri[1]] - pos[tri[0]], pos[tri[2]] - pos[tri[0]]);  // |n| = 2 * area
    for (auto v : tri) accum[v] += n;
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    VertexState& state = mesh.vertex(i);
    const double len = norm(accum[i]);
    state.normal = len > 0.0 ? accum[i] * (1.0 / len) : state.direction;

    const auto ring = mesh.neighbors(i);
    assert(!ring.empty() && "isolated vertex on a closed mesh");
    if (ring.empty()) {
      state.curvature = 0.0;
      continue;
    }
    Vec3 mean{};
    double spread = 0.0;
    for (auto j : ring) {
      mean += pos[j];
      spread += norm(pos[j] - pos[i]);
    }
    const double inv = 1.0 / static_cast<double>(ring.size());
    mean *= inv;
    spread *= inv;
    state.curvature = spread > 0.0 ? norm(mean - pos[i]) / (2.0 * spread) : 0.0;
  }
}

void radial_smooth(TriMesh& mesh, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidParams, "smooth lambda must lie in [0, 1]");
  if (lambda == 0.0) return;
  std::vector<double> next(mesh.vertex_count());
  for (std::size_t i = 0; i < next.size(); ++i) {
    const auto ring = mesh.neighbors(i);
    const double own = mesh.vertex(i).radius;
    if (ring.empty()) {
      next[i] = own;
      continue;
    }
    double sum = 0.0;
    for (auto j : ring) sum += mesh.vertex(j).radius;
    next[i] = (1.0 - lambda) * own + lambda * (sum / static_cast<double>(ring.size()));
  }
  for (std::size_t i = 0; i < next.size(); ++i) mesh.vertex(i).radius = next[i];
}

ManifoldReport check_manifold(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> undirected;
  std::unordered_map<std::uint64_t, int> directed;
  for (const auto& tri : mesh.triangles()) {
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = tri[e], b = tri[(e + 1) % 3];
      ++undirected[edge_key(a, b)];
      ++directed[(static_cast<std::uint64_t>(a) << 32) | b];
    }
  }
  ManifoldReport report;
  report.edge_count = undirected.size();
  report.closed = std::all_of(undirected.begin(), undirected.end(), [](const auto& kv) { return kv.second == 2; });
  report.oriented = std::all_of(directed.begin(), directed.end(), [](const auto& kv) { return kv.second == 1; });
  report.euler_characteristic = static_cast<long>(mesh.vertex_count()) - static_cast<long>(report.edge_count) +
                                static_cast<long>(mesh.triangle_count());
  return report;
}

double signed_fan_volume(const TriMesh& mesh) {
  double sum = 0.0;
  for (const auto& tri : mesh.triangles()) {
    const Vec3 a = mesh.position(tri[0]) - mesh.center();
    const Vec3 b = mesh.position(tri[1]) - mesh.center();
    const Vec3 c = mesh.position(tri[2]) - mesh.center();
    sum += triple(a, b, c);
  }
  return sum / 6.0;
}

std::size_t count_ray_crossings(const TriMesh& mesh, const Vec3& direction) {
  // Möller-Trumbore against every triangle.
  std::size_t hits = 0;
  const Vec3& origin = mesh.center();
  for (const auto& tri : mesh.triangles()) {
    const Vec3 p0 = mesh.position(tri[0]);
    const Vec3 e1 = mesh.position(tri[1]) - p0;
    const Vec3 e2 = mesh.position(tri[2]) - p0;
    const Vec3 pvec = cross(direction, e2);
    const double det = dot(e1, pvec);
    if (std::abs(det) < 1e-15) continue;
    const double inv = 1.0 / det;
    const Vec3 tvec = origin - p0;
    const double u = dot(tvec, pvec) * inv;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 qvec = cross(tvec, e1);
    const double v = dot(direction, qvec) * inv;
    if (v < 0.0 || u + v > 1.0) continue;
    if (dot(e2, qvec) * inv > 0.0) ++hits;
  }
  return hits;
}

StarReport check_star_shape(const TriMesh& mesh) {
  StarReport report;
  for (const auto& v : mesh.vertices()) {
    report.max_direction_error = std::max(report.max_direction_error, std::abs(norm(v.direction) - 1.0));
    if (!(v.radius > 0.0)) report.radii_positive = false;
  }
  return report;
}

}  // namespace balloon
