#include "balloon/cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"

#include "balloon/error.hpp"
#include "balloon/evaluation.hpp"
#include "balloon/inflation.hpp"
#include "balloon/json_io.hpp"
#include "balloon/metaimage.hpp"
#include "balloon/phantom.hpp"
#include "balloon/service.hpp"

namespace balloon {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Input problem that maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& what, const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " file '" + path + "' not found");
}

// Re-raises a library error with the file it came from.
template <typename F>
auto with_path(const std::string& path, F&& load) {
  try {
    return load();
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.find(path) != std::string::npos) throw;
    throw Error(e.code(), path + ": " + msg);
  }
}

struct SegmentArgs {
  std::string volume, contour, params, out_mask, out_mesh, out_stats;
};

int segment(const SegmentArgs& a, std::ostream& out) {
  require_file("volume", a.volume);
  require_file("contour", a.contour);
  if (!a.params.empty()) require_file("params", a.params);

  const ImageVolume volume = with_path(a.volume, [&] { return load_metaimage(a.volume); });
  const InitContour contour = with_path(a.contour, [&] { return contour_from_json(read_json_file(a.contour)); });
  InflationParams params;
  if (!a.params.empty()) params = with_path(a.params, [&] { return params_from_json(read_json_file(a.params)); });

  const SeedModel seed = with_path(a.contour, [&] { return derive_seed(contour, volume, params.trim_percent); });
  const SegmentationResult result = run_segmentation(volume, seed, params);

  save_mask(result.mask, a.out_mask);
  if (!a.out_mesh.empty()) save_mesh(result.mesh, a.out_mesh);
  if (!a.out_stats.empty()) write_json_file(stats_to_json(result.stats), a.out_stats);
  out << "segmented: " << result.stats.iterations_run << " iterations, " << to_string(result.stats.termination_reason)
      << ", volume " << format_number(result.stats.volume_cm3) << " cm3\n";
  return kExitOk;
}

int dsc_command(const std::string& auto_path, const std::string& ref_path, const std::string& id, std::ostream& out) {
  require_file("mask", auto_path);
  require_file("mask", ref_path);
  const BinaryMask a = with_path(auto_path, [&] { return load_mask(auto_path); });
  const BinaryMask r = with_path(ref_path, [&] { return load_mask(ref_path); });
  out << csv_header() << '\n' << csv_row(id, compare(a, r)) << '\n';
  return kExitOk;
}

int batch_command(const std::string& manifest_path, std::ostream& out) {
  require_file("manifest", manifest_path);
  const Json manifest = read_json_file(manifest_path);
  if (!manifest.is_array()) throw UsageError(manifest_path + ": manifest must be a JSON array");
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<BatchCase> cases;
  for (const auto& entry : manifest) {
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("auto") || !entry.contains("ref")) {
      throw UsageError(manifest_path + ": entries need id, auto and ref");
    }
    const std::string a = (base / entry["auto"].get<std::string>()).string();
    const std::string r = (base / entry["ref"].get<std::string>()).string();
    require_file("mask", a);
    require_file("mask", r);
    cases.push_back({entry["id"].get<std::string>(),
                     compare(with_path(a, [&] { return load_mask(a); }), with_path(r, [&] { return load_mask(r); }))});
  }
  write_batch_csv(out, cases);
  return kExitOk;
}

int phantom_command(const std::string& spec_path, const std::string& prefix, std::ostream& out) {
  require_file("phantom spec", spec_path);
  const PhantomSpec spec = with_path(spec_path, [&] { return phantom_spec_from_json(read_json_file(spec_path)); });
  const Phantom phantom = generate_phantom(spec);
  const std::string volume_path = prefix + "_volume.mha";
  const std::string truth_path = prefix + "_truth.mha";
  const std::string contour_path = prefix + "_contour.json";
  save_metaimage(phantom.volume, volume_path, ElementType::Float);
  save_mask(phantom.truth, truth_path);
  write_json_file(contour_to_json(phantom.suggested_contour), contour_path);
  out << "wrote " << volume_path << ", " << truth_path << ", " << contour_path << '\n';
  return kExitOk;
}

Service* g_running_service = nullptr;

extern "C" void handle_interrupt(int) {
  if (g_running_service != nullptr) g_running_service->stop();
}

int serve_command(int port, const std::string& volume_dir, std::ostream& out) {
  if (!fs::is_directory(volume_dir)) throw UsageError("volume directory '" + volume_dir + "' not found");
  Service service(volume_dir);
  const int bound = service.bind("127.0.0.1", port);
  out << "listening on http://127.0.0.1:" << bound << std::endl;
  g_running_service = &service;
  std::signal(SIGINT, handle_interrupt);
  std::signal(SIGTERM, handle_interrupt);
  service.run();
  g_running_service = nullptr;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Balloon-inflation segmentation of star-shaped lesions", "balloonseg"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* segment_cmd = app.add_subcommand("segment", "Segment a volume from one drawn contour");
  segment_cmd->add_option("--volume", seg.volume, "MetaImage volume (.mha/.mhd)")->required();
  segment_cmd->add_option("--contour", seg.contour, "Contour JSON")->required();
  segment_cmd->add_option("--params", seg.params, "Inflation parameters JSON");
  segment_cmd->add_option("--out-mask", seg.out_mask, "Output mask (.mha/.mhd)")->required();
  segment_cmd->add_option("--out-mesh", seg.out_mesh, "Output mesh (.obj or .stl)");
  segment_cmd->add_option("--out-stats", seg.out_stats, "Output statistics JSON");

  std::string auto_mask, ref_mask, case_id = "case";
  auto* dsc_cmd = app.add_subcommand("dsc", "Dice similarity of two masks as a CSV row");
  dsc_cmd->add_option("--auto", auto_mask, "Automatic mask")->required();
  dsc_cmd->add_option("--ref", ref_mask, "Reference mask")->required();
  dsc_cmd->add_option("--id", case_id, "Case id for the CSV row");

  std::string manifest;
  auto* batch_cmd = app.add_subcommand("batch", "Evaluate many cases into a summary CSV");
  batch_cmd->add_option("--manifest", manifest, "JSON array of {id, auto, ref}")->required();

  std::string spec_path, prefix;
  auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic volume with ground truth");
  phantom_cmd->add_option("--spec", spec_path, "Phantom spec JSON")->required();
  phantom_cmd->add_option("--out-prefix", prefix, "Prefix for the written files")->required();

  int port = 8080;
  std::string volume_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service for the contour UI");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--volume-dir", volume_dir, "Directory of volumes")->required();

  std::vector<const char*> argv{"balloonseg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*segment_cmd) return segment(seg, out);
    if (*dsc_cmd) return dsc_command(auto_mask, ref_mask, case_id, out);
    if (*batch_cmd) return batch_command(manifest, out);
    if (*phantom_cmd) return phantom_command(spec_path, prefix, out);
    if (*serve_cmd) return serve_command(port, volume_dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace balloon
