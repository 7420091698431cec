#include "balloon/service.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "httplib.h"

#include "balloon/error.hpp"
#include "balloon/evaluation.hpp"
#include "balloon/inflation.hpp"
#include "balloon/metaimage.hpp"
#include "balloon/png_encode.hpp"

namespace balloon {
namespace {

enum class JobStatus { Pending, Running, Done, Failed };

const char* status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Pending: return "pending";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "failed";
}

struct JobRecord {
  std::string id;
  std::string volume_id;
  InitContour contour;
  InflationParams params;
  JobStatus status = JobStatus::Pending;
  std::optional<SegmentationResult> result;
  std::string error;
};

// Maps a library error onto an HTTP status and the request field it concerns.
struct HttpError {
  int status;
  std::string message;
  std::string field;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::ShortPayload:
    case ErrorCode::MissingPayload:
    case ErrorCode::SplitDidNotConverge:
    case ErrorCode::MeshNotWatertight: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
  Json body{{"error", e.message}};
  if (!e.field.empty()) body["field"] = e.field;
  send_json(res, e.status, body);
}

std::int64_t parse_index(const std::string& s) {
  try {
    return std::stoll(s);
  } catch (const std::exception&) {
    throw HttpError{400, "slice index '" + s + "' is not an integer", "index"};
  }
}

void check_slice(const GridGeometry& grid, SliceAxis axis, std::int64_t index) {
  const std::int64_t n = grid.dims[static_cast<int>(axis)];
  if (index < 0 || index >= n) {
    throw HttpError{400, "slice index " + std::to_string(index) + " outside [0, " + std::to_string(n) + ")", "index"};
  }
}

}  // namespace

SliceImage render_slice(const ImageVolume& volume, SliceAxis axis, std::int64_t index, std::optional<double> level,
                        std::optional<double> width) {
  const GridGeometry& grid = volume.grid();
  check_slice(grid, axis, index);
  const auto [au, av] = in_plane_axes(axis);
  if (!level || !width) {
    const auto [lo, hi] = std::minmax_element(volume.data().begin(), volume.data().end());
    if (!level) level = 0.5 * (static_cast<double>(*lo) + static_cast<double>(*hi));
    if (!width) width = static_cast<double>(*hi) - static_cast<double>(*lo);
  }
  const double w = std::max(*width, 1e-12);
  const double low = *level - 0.5 * w;

  SliceImage img;
  img.width = static_cast<int>(grid.dims[au]);
  img.height = static_cast<int>(grid.dims[av]);
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  Index3 idx{};
  idx[static_cast<int>(axis)] = index;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      idx[au] = u;
      idx[av] = v;
      const double t = std::clamp((static_cast<double>(volume.at(idx)) - low) / w, 0.0, 1.0);
      img.pixels[static_cast<std::size_t>(v) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(u)] =
          static_cast<std::uint8_t>(std::lround(t * 255.0));
    }
  }
  return img;
}

Json mask_slice_rle(const BinaryMask& mask, SliceAxis axis, std::int64_t index) {
  const GridGeometry& grid = mask.grid();
  check_slice(grid, axis, index);
  const auto [au, av] = in_plane_axes(axis);
  Json rows = Json::array();
  Index3 idx{};
  idx[static_cast<int>(axis)] = index;
  for (std::int64_t v = 0; v < grid.dims[av]; ++v) {
    Json runs = Json::array();
    idx[av] = v;
    std::int64_t u = 0;
    while (u < grid.dims[au]) {
      idx[au] = u;
      if (!mask.at(idx)) {
        ++u;
        continue;
      }
      const std::int64_t start = u;
      for (; u < grid.dims[au]; ++u) {
        idx[au] = u;
        if (!mask.at(idx)) break;
      }
      runs.push_back(Json::array({start, u - start}));
    }
    if (!runs.empty()) rows.push_back(Json{{"y", v}, {"runs", runs}});
  }
  return rows;
}

struct Service::Impl {
  std::filesystem::path volume_dir;
  httplib::Server server;

  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const ImageVolume>> volume_cache;
  std::map<std::string, std::shared_ptr<JobRecord>> jobs;
  std::set<std::string> busy_volumes;
  std::vector<std::thread> workers;
  std::uint64_t next_job = 1;

  explicit Impl(std::filesystem::path dir) : volume_dir(std::move(dir)) { routes(); }

  ~Impl() {
    server.stop();
    for (auto& t : workers) {
      if (t.joinable()) t.join();
    }
  }

  // id -> file, sorted by id; the first of duplicate stems wins.
  std::map<std::string, std::filesystem::path> catalog() const {
    std::map<std::string, std::filesystem::path> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(volume_dir, ec)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension();
      if (ext != ".mha" && ext != ".mhd") continue;
      out.emplace(entry.path().stem().string(), entry.path());
    }
    return out;
  }

  std::shared_ptr<const ImageVolume> volume(const std::string& id) {
    {
      std::lock_guard lock(mutex);
      if (auto it = volume_cache.find(id); it != volume_cache.end()) return it->second;
    }
    const auto files = catalog();
    const auto it = files.find(id);
    if (it == files.end()) throw HttpError{404, "unknown volume '" + id + "'", "volume_id"};
    auto loaded = std::make_shared<const ImageVolume>(load_metaimage(it->second));
    std::lock_guard lock(mutex);
    return volume_cache.emplace(id, std::move(loaded)).first->second;
  }

  std::shared_ptr<JobRecord> job(const std::string& id) {
    std::lock_guard lock(mutex);
    const auto it = jobs.find(id);
    if (it == jobs.end()) throw HttpError{404, "unknown job '" + id + "'", "job_id"};
    return it->second;
  }

  // Result of a finished job; copies nothing, the record is immutable once done.
  const SegmentationResult& finished(const JobRecord& record) {
    std::lock_guard lock(mutex);
    if (record.status != JobStatus::Done) {
      throw HttpError{409, std::string("job is ") + status_name(record.status), "job_id"};
    }
    return *record.result;
  }

  template <typename Handler>
  auto guarded(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const HttpError& e) {
        send_error(res, e);
      } catch (const Error& e) {
        send_error(res, {status_for(e.code()), e.what(), ""});
      } catch (const std::exception& e) {
        send_error(res, {500, e.what(), ""});
      }
    };
  }

  void routes() {
    server.Get("/api/volumes", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json out = Json::array();
      for (const auto& [id, path] : catalog()) {
        const auto v = volume(id);
        const auto& g = v->grid();
        out.push_back(Json{{"id", id},
                           {"dims", Json::array({g.dims[0], g.dims[1], g.dims[2]})},
                           {"spacing", Json::array({g.spacing.x, g.spacing.y, g.spacing.z})}});
      }
      send_json(res, 200, out);
    }));

    server.Get(R"(/api/volumes/([^/]+)/slice/([^/]+)/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto v = volume(req.matches[1]);
                 const SliceAxis axis = parse_axis_field(req.matches[2]);
                 const std::int64_t index = parse_index(req.matches[3]);
                 std::optional<double> level, width;
                 if (req.has_param("wl")) level = parse_double(req.get_param_value("wl"), "wl");
                 if (req.has_param("ww")) width = parse_double(req.get_param_value("ww"), "ww");
                 const SliceImage img = render_slice(*v, axis, index, level, width);
                 res.set_content(encode_gray_png(img.pixels, img.width, img.height), "image/png");
               }));

    server.Post("/api/segment", guarded([this](const httplib::Request& req, httplib::Response& res) {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const nlohmann::json::parse_error& e) {
        throw HttpError{400, std::string("request body is not JSON: ") + e.what(), ""};
      }
      if (!body.is_object()) throw HttpError{400, "request body must be a JSON object", ""};
      for (const auto& [key, value] : body.items()) {
        if (key != "volume_id" && key != "contour" && key != "params") {
          throw HttpError{400, "unknown key '" + key + "'", key};
        }
      }
      if (!body.contains("volume_id") || !body["volume_id"].is_string()) {
        throw HttpError{400, "volume_id must be a string", "volume_id"};
      }
      if (!body.contains("contour")) throw HttpError{400, "contour is required", "contour"};

      auto record = std::make_shared<JobRecord>();
      record->volume_id = body["volume_id"].get<std::string>();
      const auto v = volume(record->volume_id);
      try {
        record->contour = contour_from_json(body["contour"]);
      } catch (const Error& e) {
        throw HttpError{400, e.what(), "contour"};
      }
      const int axis = static_cast<int>(record->contour.slice_axis);
      if (record->contour.slice_index < 0 || record->contour.slice_index >= v->grid().dims[axis]) {
        throw HttpError{400,
                        "slice_index " + std::to_string(record->contour.slice_index) + " outside [0, " +
                            std::to_string(v->grid().dims[axis]) + ")",
                        "contour.slice_index"};
      }
      if (body.contains("params")) {
        try {
          record->params = params_from_json(body["params"]);
        } catch (const Error& e) {
          throw HttpError{400, e.what(), "params"};
        }
      }
      try {
        (void)derive_seed(record->contour, *v, record->params.trim_percent);
      } catch (const Error& e) {
        throw HttpError{400, e.what(), "contour.points"};
      }

      {
        std::lock_guard lock(mutex);
        if (busy_volumes.contains(record->volume_id)) {
          throw HttpError{409, "a segmentation job is already running on volume '" + record->volume_id + "'",
                          "volume_id"};
        }
        busy_volumes.insert(record->volume_id);
        record->id = "job-" + std::to_string(next_job++);
        jobs.emplace(record->id, record);
        workers.emplace_back([this, record, v] { work(record, v); });
      }
      send_json(res, 200, Json{{"job_id", record->id}});
    }));

    server.Get(R"(/api/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto record = job(req.matches[1]);
      std::lock_guard lock(mutex);
      Json out{{"status", status_name(record->status)}};
      if (record->status == JobStatus::Done) out["stats"] = stats_to_json(record->result->stats);
      if (record->status == JobStatus::Failed) out["error"] = record->error;
      send_json(res, 200, out);
    }));

    server.Get(R"(/api/jobs/([^/]+)/mask)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto record = job(req.matches[1]);
      const auto& result = finished(*record);
      res.set_header("Content-Disposition", "attachment; filename=\"" + record->id + "_mask.mha\"");
      res.set_content(encode_mask_mha(result.mask), "application/octet-stream");
    }));

    server.Get(R"(/api/jobs/([^/]+)/mask/slice/([^/]+)/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto record = job(req.matches[1]);
                 const auto& result = finished(*record);
                 const SliceAxis axis = parse_axis_field(req.matches[2]);
                 send_json(res, 200, mask_slice_rle(result.mask, axis, parse_index(req.matches[3])));
               }));

    server.Get(R"(/api/jobs/([^/]+)/mesh)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto record = job(req.matches[1]);
      const auto& result = finished(*record);
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "obj";
      if (format == "obj") {
        res.set_content(to_obj(result.mesh), "text/plain");
      } else if (format == "stl") {
        res.set_content(to_binary_stl(result.mesh), "application/octet-stream");
      } else {
        throw HttpError{400, "format must be obj or stl", "format"};
      }
    }));
  }

  static SliceAxis parse_axis_field(const std::string& name) {
    try {
      return parse_axis(name);
    } catch (const Error& e) {
      throw HttpError{400, e.what(), "axis"};
    }
  }

  static double parse_double(const std::string& s, const char* field) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw HttpError{400, std::string(field) + " must be a number", field};
  }

  void work(const std::shared_ptr<JobRecord>& record, const std::shared_ptr<const ImageVolume>& v) {
    {
      std::lock_guard lock(mutex);
      record->status = JobStatus::Running;
    }
    std::optional<SegmentationResult> result;
    std::string error;
    try {
      const SeedModel seed = derive_seed(record->contour, *v, record->params.trim_percent);
      result = run_segmentation(*v, seed, record->params);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard lock(mutex);
    if (result) {
      record->result = std::move(result);
      record->status = JobStatus::Done;
    } else {
      record->error = error;
      record->status = JobStatus::Failed;
    }
    busy_volumes.erase(record->volume_id);
  }
};

Service::Service(std::filesystem::path volume_dir) : impl_(std::make_unique<Impl>(std::move(volume_dir))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + " to any port");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace balloon
