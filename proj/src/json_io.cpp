#include "balloon/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "balloon/error.hpp"

namespace balloon {
namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& known, ErrorCode code, const char* what) {
  if (!j.is_object()) throw Error(code, std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(code, std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_field(const Json& j, const char* key, ErrorCode code) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(code, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
void read_optional(const Json& j, const char* key, T& out, ErrorCode code) {
  if (j.contains(key)) out = get_field<T>(j, key, code);
}

Vec3 get_vec3(const Json& j, const char* key, ErrorCode code) {
  const auto v = get_field<std::vector<double>>(j, key, code);
  if (v.size() != 3) throw Error(code, std::string("field '") + key + "' needs 3 numbers");
  return {v[0], v[1], v[2]};
}

Json vec3_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidParams,
                path.string() + ": JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void write_json_file(const Json& value, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << value.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string_view axis_name(SliceAxis axis) {
  switch (axis) {
    case SliceAxis::X: return "x";
    case SliceAxis::Y: return "y";
    case SliceAxis::Z: return "z";
  }
  return "z";
}

SliceAxis parse_axis(std::string_view name) {
  if (name == "x") return SliceAxis::X;
  if (name == "y") return SliceAxis::Y;
  if (name == "z") return SliceAxis::Z;
  throw Error(ErrorCode::InvalidContour, "slice_axis must be one of x, y, z; got '" + std::string(name) + "'");
}

InitContour contour_from_json(const Json& j) {
  constexpr auto code = ErrorCode::InvalidContour;
  reject_unknown_keys(j, {"slice_axis", "slice_index", "points"}, code, "contour");
  InitContour c;
  c.slice_axis = parse_axis(get_field<std::string>(j, "slice_axis", code));
  c.slice_index = get_field<std::int64_t>(j, "slice_index", code);
  const auto points = get_field<std::vector<std::vector<double>>>(j, "points", code);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != 2) {
      throw Error(code, "field 'points': entry " + std::to_string(i) + " must be [u, v]");
    }
    c.points.push_back({points[i][0], points[i][1]});
  }
  return c;
}

Json contour_to_json(const InitContour& contour) {
  Json points = Json::array();
  for (const auto& p : contour.points) points.push_back(Json::array({p.u, p.v}));
  return Json{{"slice_axis", axis_name(contour.slice_axis)}, {"slice_index", contour.slice_index}, {"points", points}};
}

InflationParams params_from_json(const Json& j) {
  constexpr auto code = ErrorCode::InvalidParams;
  reject_unknown_keys(j,
                      {"split_factor", "base_step", "cosine_exponent", "curvature_gain", "smooth_lambda",
                       "trim_percent", "intensity_tolerance", "memory_decay", "max_iterations", "convergence_eps",
                       "convergence_window", "radius_stop_ratio"},
                      code, "params");
  InflationParams p;
  read_optional(j, "split_factor", p.split_factor, code);
  if (j.contains("base_step")) p.base_step = get_field<double>(j, "base_step", code);
  read_optional(j, "cosine_exponent", p.cosine_exponent, code);
  read_optional(j, "curvature_gain", p.curvature_gain, code);
  read_optional(j, "smooth_lambda", p.smooth_lambda, code);
  read_optional(j, "trim_percent", p.trim_percent, code);
  read_optional(j, "intensity_tolerance", p.intensity_tolerance, code);
  read_optional(j, "memory_decay", p.memory_decay, code);
  if (j.contains("max_iterations")) p.max_iterations = get_field<std::int64_t>(j, "max_iterations", code);
  if (j.contains("convergence_eps")) p.convergence_eps = get_field<double>(j, "convergence_eps", code);
  read_optional(j, "convergence_window", p.convergence_window, code);
  read_optional(j, "radius_stop_ratio", p.radius_stop_ratio, code);
  p.validate();
  return p;
}

Json params_to_json(const InflationParams& p) {
  Json j{{"split_factor", p.split_factor},
         {"cosine_exponent", p.cosine_exponent},
         {"curvature_gain", p.curvature_gain},
         {"smooth_lambda", p.smooth_lambda},
         {"trim_percent", p.trim_percent},
         {"intensity_tolerance", p.intensity_tolerance},
         {"memory_decay", p.memory_decay},
         {"convergence_window", p.convergence_window},
         {"radius_stop_ratio", p.radius_stop_ratio}};
  if (p.base_step) j["base_step"] = *p.base_step;
  if (p.max_iterations) j["max_iterations"] = *p.max_iterations;
  if (p.convergence_eps) j["convergence_eps"] = *p.convergence_eps;
  return j;
}

PhantomSpec phantom_spec_from_json(const Json& j) {
  constexpr auto code = ErrorCode::InvalidPhantomSpec;
  reject_unknown_keys(j,
                      {"kind", "dims", "spacing", "origin", "center", "radii", "blob_harmonics", "fg_intensity",
                       "bg_intensity", "noise_sigma", "rng_seed"},
                      code, "phantom spec");
  PhantomSpec s;
  const auto kind = get_field<std::string>(j, "kind", code);
  if (kind == "sphere") {
    s.kind = PhantomKind::Sphere;
  } else if (kind == "ellipsoid") {
    s.kind = PhantomKind::Ellipsoid;
  } else if (kind == "star_blob") {
    s.kind = PhantomKind::StarBlob;
  } else {
    throw Error(code, "field 'kind' must be sphere, ellipsoid or star_blob; got '" + kind + "'");
  }
  const auto dims = get_field<std::vector<std::int64_t>>(j, "dims", code);
  if (dims.size() != 3) throw Error(code, "field 'dims' needs 3 integers");
  s.dims = {dims[0], dims[1], dims[2]};
  if (j.contains("spacing")) s.spacing = get_vec3(j, "spacing", code);
  if (j.contains("origin")) s.origin = get_vec3(j, "origin", code);
  s.center = get_vec3(j, "center", code);
  s.radii = get_field<std::vector<double>>(j, "radii", code);
  s.blob_harmonics.clear();
  if (j.contains("blob_harmonics")) {
    for (const auto& h : get_field<std::vector<std::vector<double>>>(j, "blob_harmonics", code)) {
      if (h.size() != 2) throw Error(code, "field 'blob_harmonics': entries must be [degree, amplitude]");
      if (h[0] != std::floor(h[0])) throw Error(code, "field 'blob_harmonics': degree must be an integer");
      s.blob_harmonics.push_back({static_cast<int>(h[0]), h[1]});
    }
  }
  read_optional(j, "fg_intensity", s.fg_intensity, code);
  read_optional(j, "bg_intensity", s.bg_intensity, code);
  read_optional(j, "noise_sigma", s.noise_sigma, code);
  read_optional(j, "rng_seed", s.rng_seed, code);
  s.validate();
  return s;
}

Json phantom_spec_to_json(const PhantomSpec& s) {
  static constexpr const char* kKinds[] = {"sphere", "ellipsoid", "star_blob"};
  Json harmonics = Json::array();
  for (const auto& h : s.blob_harmonics) harmonics.push_back(Json::array({h.degree, h.amplitude}));
  return Json{{"kind", kKinds[static_cast<int>(s.kind)]},
              {"dims", s.dims},
              {"spacing", vec3_json(s.spacing)},
              {"origin", vec3_json(s.origin)},
              {"center", vec3_json(s.center)},
              {"radii", s.radii},
              {"blob_harmonics", harmonics},
              {"fg_intensity", s.fg_intensity},
              {"bg_intensity", s.bg_intensity},
              {"noise_sigma", s.noise_sigma},
              {"rng_seed", s.rng_seed}};
}

Json stats_to_json(const SegStats& s) {
  return Json{{"iterations_run", s.iterations_run},
              {"final_mean_radius", s.final_mean_radius},
              {"vertex_count", s.vertex_count},
              {"triangle_count", s.triangle_count},
              {"volume_cm3", s.volume_cm3},
              {"wall_time", s.wall_time},
              {"termination_reason", to_string(s.termination_reason)}};
}

Json report_to_json(const EvalReport& r) {
  return Json{{"dsc_percent", r.dsc_percent},
              {"volume_auto_cm3", r.volume_auto_cm3},
              {"volume_ref_cm3", r.volume_ref_cm3},
              {"voxels_auto", r.voxels_auto},
              {"voxels_ref", r.voxels_ref}};
}

}  // namespace balloon
