#include "balloon/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "balloon/error.hpp"

namespace balloon {

double dsc(const BinaryMask& a, const BinaryMask& r) {
  if (!(a.grid() == r.grid())) {
    throw Error(ErrorCode::GridMismatch, "DSC operands have different grids (dims, spacing or origin)");
  }
  std::size_t na = 0, nr = 0, both = 0;
  const auto& ba = a.bits();
  const auto& br = r.bits();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    na += ba[i];
    nr += br[i];
    both += ba[i] & br[i];
  }
  if (na + nr == 0) throw Error(ErrorCode::UndefinedDsc, "undefined DSC: both masks are empty");
  return 100.0 * (2.0 * static_cast<double>(both)) / static_cast<double>(na + nr);
}

double mask_volume_cm3(const BinaryMask& mask) {
  return static_cast<double>(mask.count()) * mask.grid().voxel_volume_mm3() / 1000.0;
}

EvalReport compare(const BinaryMask& automatic, const BinaryMask& reference) {
  EvalReport report;
  report.dsc_percent = dsc(automatic, reference);
  report.voxels_auto = automatic.count();
  report.voxels_ref = reference.count();
  report.volume_auto_cm3 = mask_volume_cm3(automatic);
  report.volume_ref_cm3 = mask_volume_cm3(reference);
  return report;
}

ColumnSummary summarize(const std::vector<double>& values) {
  ColumnSummary s;
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

BatchSummary summarize(const std::vector<BatchCase>& cases) {
  auto column = [&](auto get) {
    std::vector<double> values;
    values.reserve(cases.size());
    for (const auto& c : cases) values.push_back(static_cast<double>(get(c.report)));
    return summarize(values);
  };
  BatchSummary s;
  s.volume_auto_cm3 = column([](const EvalReport& r) { return r.volume_auto_cm3; });
  s.volume_ref_cm3 = column([](const EvalReport& r) { return r.volume_ref_cm3; });
  s.voxels_auto = column([](const EvalReport& r) { return r.voxels_auto; });
  s.voxels_ref = column([](const EvalReport& r) { return r.voxels_ref; });
  s.dsc_percent = column([](const EvalReport& r) { return r.dsc_percent; });
  return s;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, res.ptr);
  if (std::isfinite(value) && out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string csv_header() { return "id,vol_auto,vol_ref,voxels_auto,voxels_ref,dsc"; }

std::string csv_row(const std::string& id, const EvalReport& report) {
  return id + ',' + format_number(report.volume_auto_cm3) + ',' + format_number(report.volume_ref_cm3) + ',' +
         std::to_string(report.voxels_auto) + ',' + std::to_string(report.voxels_ref) + ',' +
         format_number(report.dsc_percent);
}

void write_batch_csv(std::ostream& out, const std::vector<BatchCase>& cases) {
  out << csv_header() << '\n';
  for (const auto& c : cases) out << csv_row(c.id, c.report) << '\n';
  if (cases.empty()) return;
  const BatchSummary s = summarize(cases);
  auto row = [&](const char* name, auto pick) {
    out << name << ',' << format_number(pick(s.volume_auto_cm3)) << ',' << format_number(pick(s.volume_ref_cm3))
        << ',' << format_number(pick(s.voxels_auto)) << ',' << format_number(pick(s.voxels_ref)) << ','
        << format_number(pick(s.dsc_percent)) << '\n';
  };
  row("min", [](const ColumnSummary& c) { return c.min; });
  row("max", [](const ColumnSummary& c) { return c.max; });
  row("mean", [](const ColumnSummary& c) { return c.mean; });
  row("std", [](const ColumnSummary& c) { return c.stddev; });
}

}  // namespace balloon
