#include "octlayers/comparison.hpp"

#include <algorithm>

#include "octlayers/error.hpp"

namespace octlayers {

const ComparisonRecord& CellComparison::at(std::string_view cell_id) const {
  const auto it = std::find(cell_ids.begin(), cell_ids.end(), cell_id);
  if (it == cell_ids.end()) fail(ErrorKind::Range, "no comparison for cell '" + std::string(cell_id) + "'");
  return records[static_cast<std::size_t>(it - cell_ids.begin())];
}

void check_groups(std::span<const AttributeMap> patients, std::span<const AttributeMap> controls,
                  int min_samples) {
  if (static_cast<int>(patients.size()) < min_samples ||
      static_cast<int>(controls.size()) < min_samples)
    fail(ErrorKind::InsufficientData, "each group needs at least " + std::to_string(min_samples) +
                                          " maps (patients " + std::to_string(patients.size()) +
                                          ", controls " + std::to_string(controls.size()) + ")");
  const auto& ref = patients.front();
  auto check = [&](const AttributeMap& m) {
    if (!m.domain.compatible(ref.domain) || !m.values.same_shape(ref.values))
      fail(ErrorKind::Domain, "all maps must share one en-face domain");
  };
  for (const auto& m : patients) check(m);
  for (const auto& m : controls) check(m);
}

ComparisonRecord compare_samples(std::span<const double> patients, std::span<const double> controls,
                                 const CompareConfig& config) {
  ComparisonRecord r;
  r.n_p = patients.size();
  r.n_c = controls.size();
  const auto minimum = static_cast<std::size_t>(std::max(config.min_samples, 3));
  if (r.n_p < minimum || r.n_c < minimum) return r;
  r.tested = true;
  r.mean_p = mean_of(patients);
  r.mean_c = mean_of(controls);
  r.diff = r.mean_p - r.mean_c;
  const TestResult t = two_sample_test(patients, controls, config.test);
  r.statistic = t.statistic;
  r.p = t.p;
  r.d = effect_size(patients, controls);
  return r;
}

namespace {

template <typename Records>
void apply_correction(Records& records, const CompareConfig& config, double& threshold,
                      std::size_t& tested, std::size_t& significant) {
  std::vector<double> p;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].tested) continue;
    p.push_back(records[i].p);
    index.push_back(i);
  }
  const Adjustment adj = adjust_pvalues(p, config.correction, config.alpha);
  threshold = adj.threshold;
  tested = p.size();
  significant = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    records[index[k]].significant = adj.significant[k] != 0;
    significant += adj.significant[k];
  }
}

}  // namespace

ComparisonMap compare_pointwise(std::span<const AttributeMap> patients,
                                std::span<const AttributeMap> controls, const CompareConfig& config) {
  check_groups(patients, controls, std::max(config.min_samples, 3));
  ComparisonMap out;
  out.domain = patients.front().domain;
  out.layer_id = patients.front().layer_id;
  out.kind = patients.front().kind;
  out.config = config;
  const int w = out.domain.width, h = out.domain.n_bscans;
  out.records.resize(static_cast<std::size_t>(w) * h);

  std::vector<double> a, b;
  a.reserve(patients.size());
  b.reserve(controls.size());
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      a.clear();
      b.clear();
      for (const auto& m : patients)
        if (const double v = m.values(ix, iy); is_valid(v)) a.push_back(v);
      for (const auto& m : controls)
        if (const double v = m.values(ix, iy); is_valid(v)) b.push_back(v);
      out.records[static_cast<std::size_t>(iy) * w + ix] = compare_samples(a, b, config);
    }
  }
  apply_correction(out.records, config, out.threshold, out.tested_count, out.significant_count);
  return out;
}

CellComparison compare_gridwise(const AdaptiveGrid& grid, std::span<const AttributeMap> patients,
                                std::span<const AttributeMap> controls, const CompareConfig& config,
                                const SummaryThresholds& thresholds) {
  check_groups(patients, controls, std::max(config.min_samples, 3));
  CellComparison out;
  out.grid = grid;
  out.config = config;
  out.cell_ids = grid.leaf_ids();
  std::vector<double> a, b;
  for (const auto& id : out.cell_ids) {
    const GridCell& cell = grid.cell(id);
    a.clear();
    b.clear();
    for (const auto& m : patients)
      if (const auto s = summarize_cell(m, cell, thresholds); s.reliable) a.push_back(s.mean);
    for (const auto& m : controls)
      if (const auto s = summarize_cell(m, cell, thresholds); s.reliable) b.push_back(s.mean);
    out.records.push_back(compare_samples(a, b, config));
  }
  std::size_t tested = 0, significant = 0;
  apply_correction(out.records, config, out.threshold, tested, significant);
  return out;
}

}  // namespace octlayers
