#include "octlayers/measure.hpp"

#include <algorithm>

#include "octlayers/error.hpp"

namespace octlayers {

namespace {

std::size_t check_mask(const EnFaceDomain& domain, const Mask& mask) {
  if (mask.width() != domain.width || mask.height() != domain.n_bscans)
    fail(ErrorKind::Selection, "selection mask does not match the map lattice");
  std::size_t n = 0;
  for (auto m : mask.values()) n += m ? 1 : 0;
  if (n == 0) fail(ErrorKind::Selection, "selection is empty");
  return n;
}

std::vector<double> masked_values(const AttributeMap& map, const Mask& mask) {
  std::vector<double> out;
  for (int iy = 0; iy < mask.height(); ++iy)
    for (int ix = 0; ix < mask.width(); ++ix)
      if (mask(ix, iy) && map.valid(ix, iy)) out.push_back(map.values(ix, iy));
  return out;
}

void fill_descriptive(MeasurementSummary& m, std::span<const double> values) {
  CellSummary s;
  describe_values(values, s);
  m.n = s.n_valid;
  m.mean = s.mean;
  m.sd = s.sd;
  m.min = s.min;
  m.max = s.max;
}

}  // namespace

MeasurementSummary measure_region(const AttributeMap& map, const Mask& mask,
                                  const ControlModel* model, const SummaryThresholds&) {
  MeasurementSummary m;
  m.n_points = check_mask(map.domain, mask);
  m.area_mm2 = static_cast<double>(m.n_points) * map.domain.pixel_area_mm2();
  fill_descriptive(m, masked_values(map, mask));
  if (model) {
    if (!model->domain.compatible(map.domain))
      fail(ErrorKind::Domain, "control model uses a different domain");
    double sum = 0.0;
    std::size_t n = 0;
    for (int iy = 0; iy < mask.height(); ++iy)
      for (int ix = 0; ix < mask.width(); ++ix)
        if (mask(ix, iy) && map.valid(ix, iy) && model->usable(ix, iy)) {
          sum += map.values(ix, iy) - model->mean(ix, iy);
          ++n;
        }
    if (n > 0) m.mean_diff = sum / static_cast<double>(n);
  }
  return m;
}

MeasurementSummary measure_region(std::span<const AttributeMap> patients,
                                  std::span<const AttributeMap> controls, const Mask& mask,
                                  const CompareConfig& config, const SummaryThresholds& thresholds) {
  check_groups(patients, controls, std::max(config.min_samples, 3));
  MeasurementSummary m;
  const auto& domain = patients.front().domain;
  m.n_points = check_mask(domain, mask);
  m.area_mm2 = static_cast<double>(m.n_points) * domain.pixel_area_mm2();
  fill_descriptive(m, masked_values(group_mean_map(patients), mask));

  auto subject_means = [&](std::span<const AttributeMap> group) {
    std::vector<double> means;
    for (const auto& map : group) {
      const auto values = masked_values(map, mask);
      CellSummary s;
      describe_values(values, s);
      const double coverage = static_cast<double>(values.size()) / static_cast<double>(m.n_points);
      if (coverage >= thresholds.min_coverage && values.size() >= thresholds.min_valid)
        means.push_back(s.mean);
    }
    return means;
  };
  const auto a = subject_means(patients);
  const auto b = subject_means(controls);
  const ComparisonRecord rec = compare_samples(a, b, config);
  m.n_p = rec.n_p;
  m.n_c = rec.n_c;
  if (rec.tested) {
    m.mean_p = rec.mean_p;
    m.mean_c = rec.mean_c;
    m.mean_diff = rec.diff;
    m.p = rec.p;
    m.effect_size = rec.d;
    m.statistic = rec.statistic;
    m.test = config.test;
  }
  return m;
}

Mask mask_from_polygon(const EnFaceDomain& domain, std::span<const PhysicalPoint> polygon) {
  Mask mask(domain.width, domain.n_bscans, 0);
  if (polygon.size() < 3) return mask;
  const std::size_t n = polygon.size();
  for (int iy = 0; iy < domain.n_bscans; ++iy) {
    for (int ix = 0; ix < domain.width; ++ix) {
      const PhysicalPoint p = domain.to_physical(ix, iy);
      bool inside = false;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = polygon[i];
        const auto& b = polygon[j];
        if ((a.y_mm > p.y_mm) != (b.y_mm > p.y_mm) &&
            p.x_mm < (b.x_mm - a.x_mm) * (p.y_mm - a.y_mm) / (b.y_mm - a.y_mm) + a.x_mm)
          inside = !inside;
      }
      mask(ix, iy) = inside ? 1 : 0;
    }
  }
  return mask;
}

Mask mask_from_cells(const EnFaceDomain& domain, const AdaptiveGrid& grid,
                     std::span<const std::string> cell_ids) {
  Mask mask(domain.width, domain.n_bscans, 0);
  for (const auto& id : cell_ids) {
    const Mask m = cell_mask(domain, grid.cell(id));
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m.values()[i]) mask.values()[i] = 1;
  }
  return mask;
}

}  // namespace octlayers
