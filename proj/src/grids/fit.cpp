#include <cmath>

#include "grid_access.hpp"
#include "octlayers/error.hpp"

namespace octlayers {

using detail::GridAccess;

namespace {

void check_fit_params(double sd_threshold, int max_depth) {
  if (!(sd_threshold > 0.0) || !std::isfinite(sd_threshold))
    fail(ErrorKind::Spec, "sd_threshold must be > 0");
  if (max_depth < 0 || max_depth > AdaptiveGrid::kHardMaxDepth)
    fail(ErrorKind::Spec, "max_depth must be in [0, " + std::to_string(AdaptiveGrid::kHardMaxDepth) + "]");
}

void refine_cell(AdaptiveGrid& g, const std::string& id, double thr, int max_depth,
                 std::size_t min_points) {
  auto& cells = GridAccess::cells(g);
  GridCell& cell = cells.at(id);
  if (!cell.is_leaf()) {
    const auto children = cell.children;
    for (const auto& c : children) refine_cell(g, c, thr, max_depth, min_points);
    return;
  }
  if (!cell.summary || !(cell.summary->sd > thr) || cell.depth >= max_depth ||
      cell.depth >= AdaptiveGrid::kHardMaxDepth)
    return;
  auto children = child_cells(cell);
  for (auto& c : children) {
    c.summary = GridAccess::summarize(g, c);
    if (c.summary->n_valid < min_points) return;
  }
  std::vector<std::string> ids;
  for (auto& c : children) {
    ids.push_back(c.id);
    cells.emplace(c.id, std::move(c));
  }
  cells.at(id).children = ids;
  for (const auto& c : ids) refine_cell(g, c, thr, max_depth, min_points);
}

}  // namespace

AdaptiveGrid refine_grid(const AdaptiveGrid& grid, double sd_threshold, int max_depth,
                         std::size_t min_points) {
  check_fit_params(sd_threshold, max_depth);
  AdaptiveGrid out = grid;
  if (out.source()) {
    for (const auto& root : out.roots()) refine_cell(out, root, sd_threshold, max_depth, min_points);
  }
  auto& prov = GridAccess::provenance(out);
  prov.sd_threshold = sd_threshold;
  prov.max_depth = max_depth;
  prov.min_points = min_points;
  return out;
}

AdaptiveGrid fit_grid(const AttributeMap& map, double sd_threshold, int max_depth,
                      std::size_t min_points, const SummaryThresholds& thresholds) {
  check_fit_params(sd_threshold, max_depth);
  auto source = std::make_shared<SummarySource>();
  source->map = map;
  source->thresholds = thresholds;
  EtdrsLayout layout;
  layout.eye = map.domain.eye;
  return refine_grid(etdrs_base_grid(layout, std::move(source)), sd_threshold, max_depth,
                     min_points);
}

AttributeMap group_mean_map(std::span<const AttributeMap> maps) {
  if (maps.empty()) fail(ErrorKind::InsufficientData, "group mean of zero maps");
  const auto& first = maps.front();
  for (const auto& m : maps) {
    if (!m.domain.compatible(first.domain) || !m.values.same_shape(first.values))
      fail(ErrorKind::Domain, "maps do not share one en-face domain");
  }
  AttributeMap out;
  out.layer_id = first.layer_id;
  out.kind = first.kind;
  out.domain = first.domain;
  out.unit = first.unit;
  out.values = Raster<double>(first.values.width(), first.values.height(), invalid_value<double>());
  const std::size_t n = maps.size();
  auto dst = out.values.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    double sum = 0.0;
    std::size_t valid = 0;
    for (const auto& m : maps) {
      const double v = m.values.values()[i];
      if (is_valid(v)) {
        sum += v;
        ++valid;
      }
    }
    // Valid iff invalid in no more than half of the maps.
    if (valid > 0 && 2 * valid >= n) dst[i] = sum / static_cast<double>(valid);
  }
  return out;
}

AdaptiveGrid fit_common_grid(std::span<const AttributeMap> maps, double sd_threshold, int max_depth,
                             std::size_t min_points, const SummaryThresholds& thresholds) {
  check_fit_params(sd_threshold, max_depth);
  if (maps.size() < 2) fail(ErrorKind::InsufficientData, "common grid needs at least 2 maps");
  auto source = std::make_shared<SummarySource>();
  source->map = group_mean_map(maps);
  source->subjects.assign(maps.begin(), maps.end());
  source->thresholds = thresholds;
  EtdrsLayout layout;
  layout.eye = maps.front().domain.eye;
  return refine_grid(etdrs_base_grid(layout, std::move(source)), sd_threshold, max_depth,
                     min_points);
}

}  // namespace octlayers
