#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "octlayers/attributes.hpp"

namespace octlayers {

struct ControlModel {
  EnFaceDomain domain;
  AttributeKind kind;
  int layer_id = 0;
  Raster<double> mean;
  Raster<double> sd;
  Raster<double> lower;
  Raster<double> upper;
  Raster<int> n_valid;
  double percentile_lo = 2.5;
  double percentile_hi = 97.5;
  int min_valid = 3;

  bool usable(int ix, int iy) const { return n_valid(ix, iy) >= min_valid; }
};

/// Per-point mean, sample SD and empirical percentile bounds (linear
/// interpolation between order statistics) over the valid control values.
/// Needs >= 3 maps on one domain.
ControlModel build_control_model(std::span<const AttributeMap> controls,
                                 std::pair<double, double> percentiles = {2.5, 97.5});

/// Linear-interpolation percentile (0-100) of an unsorted sample.
double empirical_percentile(std::span<const double> values, double percent);

enum class IntervalFlag : std::uint8_t { Invalid = 0, Below = 1, Inside = 2, Above = 3 };

struct DeviationMap {
  EnFaceDomain domain;
  Raster<double> z;  // NaN where invalid; +-kInfiniteSentinel when sd == 0
  Raster<std::uint8_t> flag;
};

DeviationMap deviation_map(const AttributeMap& patient, const ControlModel& model);

}  // namespace octlayers
