#pragma once

#include <filesystem>

#include "json.hpp"

#include "balloon/evaluation.hpp"
#include "balloon/inflation.hpp"
#include "balloon/initializer.hpp"
#include "balloon/phantom.hpp"

namespace balloon {

using Json = nlohmann::json;

/// Parses a file as JSON. Throws Io when unreadable and InvalidParams with
/// the path and byte offset on a syntax error.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& value, const std::filesystem::path& path);

// {"slice_axis": "z", "slice_index": 17, "points": [[x0, y0], ...]}
InitContour contour_from_json(const Json& j);
Json contour_to_json(const InitContour& contour);

/// Flat object with the InflationParams field names. Omitted fields keep
/// their defaults; unknown fields throw InvalidParams naming the key.
InflationParams params_from_json(const Json& j);
Json params_to_json(const InflationParams& params);

PhantomSpec phantom_spec_from_json(const Json& j);
Json phantom_spec_to_json(const PhantomSpec& spec);

Json stats_to_json(const SegStats& stats);
Json report_to_json(const EvalReport& report);

std::string_view axis_name(SliceAxis axis);
SliceAxis parse_axis(std::string_view name);

}  // namespace balloon
