#pragma once

#include <optional>
#include <span>

#include "octlayers/comparison.hpp"
#include "octlayers/control_model.hpp"
#include "octlayers/regions.hpp"

namespace octlayers {

struct MeasurementSummary {
  std::size_t n = 0;  // valid points in the selection
  std::size_t n_points = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  double area_mm2 = 0.0;
  std::optional<double> mean_diff;  // vs control mean or control group
  // Two-group measurements only.
  std::optional<std::size_t> n_p, n_c;
  std::optional<double> mean_p, mean_c;
  std::optional<double> p, effect_size, statistic;
  std::optional<TestKind> test;
};

/// Descriptive statistics over the valid points of `map` inside `mask`;
/// with a model, also the mean of (value - control mean) over usable points.
/// Throws Error(Selection) for an empty or mismatched mask.
MeasurementSummary measure_region(const AttributeMap& map, const Mask& mask,
                                  const ControlModel* model = nullptr,
                                  const SummaryThresholds& thresholds = {});

/// Two groups: descriptive statistics over the patient group-mean map, and
/// per-subject mask means (subjects passing `thresholds`) fed to the test and
/// Cohen's d exactly as for one grid cell.
MeasurementSummary measure_region(std::span<const AttributeMap> patients,
                                  std::span<const AttributeMap> controls, const Mask& mask,
                                  const CompareConfig& config,
                                  const SummaryThresholds& thresholds = {});

/// Lattice points whose centers fall inside the polygon (mm, even-odd rule).
Mask mask_from_polygon(const EnFaceDomain& domain, std::span<const PhysicalPoint> polygon);

/// Union of leaf cells.
Mask mask_from_cells(const EnFaceDomain& domain, const AdaptiveGrid& grid,
                     std::span<const std::string> cell_ids);

}  // namespace octlayers
