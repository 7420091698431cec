#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include "balloon/error.hpp"
#include "balloon/mesh.hpp"

namespace balloon {
namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::string to_obj(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertex_count() * 40 + mesh.triangle_count() * 24);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3 p = mesh.position(i);
    out += "v ";
    append_number(out, p.x);
    out += ' ';
    append_number(out, p.y);
    out += ' ';
    append_number(out, p.z);
    out += '\n';
  }
  for (const auto& tri : mesh.triangles()) {
    out += "f " + std::to_string(tri[0] + 1) + ' ' + std::to_string(tri[1] + 1) + ' ' + std::to_string(tri[2] + 1) + '\n';
  }
  return out;
}

std::string to_binary_stl(const TriMesh& mesh) {
  std::string out(80, '\0');
  constexpr char kTitle[] = "balloonseg star-shaped segmentation mesh";
  std::memcpy(out.data(), kTitle, sizeof(kTitle) - 1);
  append_le(out, static_cast<std::uint32_t>(mesh.triangle_count()));
  for (const auto& tri : mesh.triangles()) {
    const Vec3 a = mesh.position(tri[0]), b = mesh.position(tri[1]), c = mesh.position(tri[2]);
    const Vec3 n = normalized(cross(b - a, c - a));
    for (const Vec3& v : {n, a, b, c}) {
      append_le(out, static_cast<float>(v.x));
      append_le(out, static_cast<float>(v.y));
      append_le(out, static_cast<float>(v.z));
    }
    append_le(out, std::uint16_t{0});
  }
  return out;
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  const bool stl = path.size() >= 4 && (path.ends_with(".stl") || path.ends_with(".STL"));
  const std::string bytes = stl ? to_binary_stl(mesh) : to_obj(mesh);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace balloon
