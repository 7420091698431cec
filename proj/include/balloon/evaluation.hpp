#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "balloon/volume.hpp"

namespace balloon {

/// Dice similarity in percent, 100 * 2|A ∩ R| / (|A| + |R|). Throws
/// GridMismatch when the grids differ and UndefinedDsc when both are empty.
double dsc(const BinaryMask& a, const BinaryMask& r);

/// Voxel count times voxel volume, in cm³.
double mask_volume_cm3(const BinaryMask& mask);

struct EvalReport {
  double dsc_percent = 0.0;
  double volume_auto_cm3 = 0.0;
  double volume_ref_cm3 = 0.0;
  std::size_t voxels_auto = 0;
  std::size_t voxels_ref = 0;
};

EvalReport compare(const BinaryMask& automatic, const BinaryMask& reference);

struct ColumnSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

ColumnSummary summarize(const std::vector<double>& values);

struct BatchCase {
  std::string id;
  EvalReport report;
};

struct BatchSummary {
  ColumnSummary volume_auto_cm3;
  ColumnSummary volume_ref_cm3;
  ColumnSummary voxels_auto;
  ColumnSummary voxels_ref;
  ColumnSummary dsc_percent;
};

BatchSummary summarize(const std::vector<BatchCase>& cases);

/// Shortest round-trip decimal, always with a fractional part ("100.0").
std::string format_number(double value);

/// "id,vol_auto,vol_ref,voxels_auto,voxels_ref,dsc"
std::string csv_header();
std::string csv_row(const std::string& id, const EvalReport& report);

/// One row per case followed by min, max, mean and std summary rows.
void write_batch_csv(std::ostream& out, const std::vector<BatchCase>& cases);

}  // namespace balloon
