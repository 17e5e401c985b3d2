#include "octlayers/control_model.hpp"

#include <algorithm>
#include <cmath>

#include "octlayers/error.hpp"
#include "octlayers/hypothesis.hpp"

namespace octlayers {

double empirical_percentile(std::span<const double> values, double percent) {
  if (values.empty()) return invalid_value<double>();
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * std::clamp(percent, 0.0, 100.0) / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

ControlModel build_control_model(std::span<const AttributeMap> controls,
                                 std::pair<double, double> percentiles) {
  if (controls.size() < 3)
    fail(ErrorKind::InsufficientData,
         "control model needs at least 3 maps, got " + std::to_string(controls.size()));
  const auto& first = controls.front();
  for (const auto& m : controls)
    if (!m.domain.compatible(first.domain) || !m.values.same_shape(first.values))
      fail(ErrorKind::Domain, "control maps do not share one en-face domain");
  if (!(percentiles.first >= 0.0 && percentiles.first < percentiles.second &&
        percentiles.second <= 100.0))
    fail(ErrorKind::Spec, "percentiles must satisfy 0 <= lo < hi <= 100");

  ControlModel model;
  model.domain = first.domain;
  model.kind = first.kind;
  model.layer_id = first.layer_id;
  model.percentile_lo = percentiles.first;
  model.percentile_hi = percentiles.second;
  const int w = first.values.width(), h = first.values.height();
  const double nan = invalid_value<double>();
  model.mean = Raster<double>(w, h, nan);
  model.sd = Raster<double>(w, h, nan);
  model.lower = Raster<double>(w, h, nan);
  model.upper = Raster<double>(w, h, nan);
  model.n_valid = Raster<int>(w, h, 0);

  std::vector<double> sample;
  sample.reserve(controls.size());
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      sample.clear();
      for (const auto& m : controls)
        if (const double v = m.values(ix, iy); is_valid(v)) sample.push_back(v);
      model.n_valid(ix, iy) = static_cast<int>(sample.size());
      if (static_cast<int>(sample.size()) < model.min_valid) continue;
      const double mean = mean_of(sample);
      model.mean(ix, iy) = mean;
      model.sd(ix, iy) = std::sqrt(sample_variance(sample));
      // Keep the interval around the mean even for skewed samples.
      model.lower(ix, iy) = std::min(empirical_percentile(sample, percentiles.first), mean);
      model.upper(ix, iy) = std::max(empirical_percentile(sample, percentiles.second), mean);
    }
  }
  return model;
}

DeviationMap deviation_map(const AttributeMap& patient, const ControlModel& model) {
  if (!patient.domain.compatible(model.domain) || !patient.values.same_shape(model.mean))
    fail(ErrorKind::Domain, "patient map and control model use different domains");
  const int w = patient.values.width(), h = patient.values.height();
  DeviationMap out;
  out.domain = patient.domain;
  out.z = Raster<double>(w, h, invalid_value<double>());
  out.flag = Raster<std::uint8_t>(w, h, static_cast<std::uint8_t>(IntervalFlag::Invalid));
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      const double v = patient.values(ix, iy);
      if (!is_valid(v) || !model.usable(ix, iy)) continue;
      const double mean = model.mean(ix, iy), sd = model.sd(ix, iy);
      double z;
      if (sd > 0.0) z = (v - mean) / sd;
      else if (v == mean) z = 0.0;
      else z = v > mean ? kInfiniteSentinel : -kInfiniteSentinel;
      out.z(ix, iy) = z;
      IntervalFlag f = IntervalFlag::Inside;
      if (v < model.lower(ix, iy)) f = IntervalFlag::Below;
      else if (v > model.upper(ix, iy)) f = IntervalFlag::Above;
      out.flag(ix, iy) = static_cast<std::uint8_t>(f);
    }
  }
  return out;
}

}  // namespace octlayers
