#include <algorithm>
#include <cmath>
#include <numbers>

#include "grid_access.hpp"
#include "octlayers/error.hpp"

namespace octlayers {

using detail::GridAccess;

namespace {

constexpr Quadrant kQuadrantOrder[] = {Quadrant::Nasal, Quadrant::Superior, Quadrant::Temporal,
                                       Quadrant::Inferior};

double sample_sd(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Integer lattice window (possibly extending past the map) covering the cell.
struct Window {
  int ix0, ix1, iy0, iy1;
};

Window window_for(const EnFaceDomain& d, const GridCell& cell) {
  const double rx = cell.r_outer * 1000.0 / d.res_lateral_um;
  const double ry = cell.r_outer * 1000.0 / d.res_bscan_um;
  return {static_cast<int>(std::floor(d.fovea_ix - rx)) - 1,
          static_cast<int>(std::ceil(d.fovea_ix + rx)) + 1,
          static_cast<int>(std::floor(d.fovea_iy - ry)) - 1,
          static_cast<int>(std::ceil(d.fovea_iy + ry)) + 1};
}

CellSummary summarize_impl(const AttributeMap& map, const GridCell& cell,
                           const Raster<double>* include, const SummaryThresholds& th) {
  const auto& d = map.domain;
  const Window w = window_for(d, cell);
  std::vector<double> vals;
  CellSummary s;
  for (int iy = w.iy0; iy <= w.iy1; ++iy) {
    for (int ix = w.ix0; ix <= w.ix1; ++ix) {
      if (!cell_point_membership(cell, d.to_physical(ix, iy))) continue;
      ++s.n_total;
      if (!map.values.in_bounds(ix, iy)) continue;
      const double v = map.values(ix, iy);
      if (!is_valid(v)) continue;
      if (include && !is_valid((*include)(ix, iy))) continue;
      vals.push_back(v);
    }
  }
  describe_values(vals, s);
  s.coverage = s.n_total == 0 ? 0.0 : static_cast<double>(s.n_valid) / static_cast<double>(s.n_total);
  s.reliable = s.coverage >= th.min_coverage && s.n_valid >= th.min_valid;
  return s;
}

}  // namespace

void describe_values(std::span<const double> vals, CellSummary& s) {
  s.n_valid = vals.size();
  if (vals.empty()) {
    s.mean = s.sd = s.min = s.max = 0.0;
    return;
  }
  double sum = 0.0;
  for (double v : vals) sum += v;
  s.mean = sum / static_cast<double>(vals.size());
  s.sd = sample_sd(vals, s.mean);
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding can put the mean a hair outside [min, max] for constant data.
  s.mean = std::clamp(s.mean, s.min, s.max);
}

std::optional<CellSummary> detail::GridAccess::summarize(const AdaptiveGrid& g,
                                                         const GridCell& cell) {
  const auto& src = g.source();
  if (!src) return std::nullopt;
  CellSummary s = summarize_cell(src->map, cell, src->thresholds);
  if (!src->subjects.empty()) {
    std::vector<double> means;
    for (const auto& subject : src->subjects) {
      const CellSummary ss = summarize_cell(subject, cell, src->map.values, src->thresholds);
      if (ss.n_valid > 0) means.push_back(ss.mean);
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    if (!means.empty()) mean /= static_cast<double>(means.size());
    s.between_subject_sd = sample_sd(means, mean);
    s.n_subjects = means.size();
  }
  return s;
}

CellSummary summarize_cell(const AttributeMap& map, const GridCell& cell,
                           const SummaryThresholds& thresholds) {
  return summarize_impl(map, cell, nullptr, thresholds);
}

CellSummary summarize_cell(const AttributeMap& map, const GridCell& cell,
                           const Raster<double>& include, const SummaryThresholds& thresholds) {
  if (!include.same_shape(map.values))
    fail(ErrorKind::Domain, "inclusion raster does not match the map lattice");
  return summarize_impl(map, cell, &include, thresholds);
}

bool AdaptiveGrid::contains(std::string_view id) const {
  return cells_.find(std::string(id)) != cells_.end();
}

const GridCell& AdaptiveGrid::cell(std::string_view id) const {
  const auto it = cells_.find(std::string(id));
  if (it == cells_.end()) fail(ErrorKind::Range, "unknown cell '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> AdaptiveGrid::leaf_ids() const {
  std::vector<std::string> out;
  std::vector<std::string> stack(roots_.rbegin(), roots_.rend());
  while (!stack.empty()) {
    const std::string id = std::move(stack.back());
    stack.pop_back();
    const auto& c = cells_.at(id);
    if (c.is_leaf()) out.push_back(id);
    else
      for (auto it = c.children.rbegin(); it != c.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::size_t AdaptiveGrid::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const auto& kv) { return kv.second.is_leaf(); }));
}

const GridCell* AdaptiveGrid::locate(PhysicalPoint p) const {
  const GridCell* found = nullptr;
  for (const auto& id : roots_) {
    const auto& c = cells_.at(id);
    if (cell_point_membership(c, p)) {
      found = &c;
      break;
    }
  }
  while (found && !found->is_leaf()) {
    const GridCell* next = nullptr;
    for (const auto& id : found->children) {
      const auto& c = cells_.at(id);
      if (cell_point_membership(c, p)) {
        next = &c;
        break;
      }
    }
    found = next;
  }
  return found;
}

void AdaptiveGrid::check_invariants() const {
  std::vector<std::string> issues;
  if (roots_.size() != 9) issues.push_back("expected 9 base cells, found " + std::to_string(roots_.size()));
  std::size_t reachable = 0;
  std::vector<std::string> stack(roots_.begin(), roots_.end());
  while (!stack.empty()) {
    const std::string id = stack.back();
    stack.pop_back();
    const auto it = cells_.find(id);
    if (it == cells_.end()) {
      issues.push_back("dangling cell id " + id);
      continue;
    }
    ++reachable;
    const auto& c = it->second;
    if (!(c.r_inner < c.r_outer)) issues.push_back(id + ": r_inner >= r_outer");
    const double span = c.theta_end - c.theta_start;
    if (!(span > 0.0 && span <= 2.0 * std::numbers::pi + 1e-12))
      issues.push_back(id + ": invalid angular span");
    if (c.is_leaf()) continue;
    if (c.children.size() != 4) {
      issues.push_back(id + ": expected 4 children");
      continue;
    }
    const auto expected = child_cells(c);
    for (int k = 0; k < 4; ++k) {
      const auto ch = cells_.find(c.children[k]);
      if (ch == cells_.end()) {
        issues.push_back("dangling child " + c.children[k]);
        continue;
      }
      const auto& e = expected[k];
      const auto& a = ch->second;
      if (a.id != e.id || a.depth != e.depth || a.r_inner != e.r_inner || a.r_outer != e.r_outer ||
          a.theta_start != e.theta_start || a.theta_end != e.theta_end)
        issues.push_back(a.id + ": does not tile its parent " + id);
      stack.push_back(a.id);
    }
  }
  if (reachable != cells_.size()) issues.push_back("unreachable cells present");
  if (!issues.empty()) fail(ErrorKind::Validation, "grid invariant violated: " + issues.front(), issues);
}

AdaptiveGrid etdrs_base_grid(const EtdrsLayout& layout, std::shared_ptr<const SummarySource> source) {
  layout.validate();
  AdaptiveGrid g;
  GridAccess::layout(g) = layout;
  GridAccess::source(g) = std::move(source);
  auto& cells = GridAccess::cells(g);
  auto& roots = GridAccess::roots(g);

  const double r0 = layout.diameters_mm[0] / 2.0;
  const double r1 = layout.diameters_mm[1] / 2.0;
  const double r2 = layout.diameters_mm[2] / 2.0;
  const double quarter = std::numbers::pi / 2.0;
  double bounds[5];
  for (int q = 0; q < 4; ++q) bounds[q] = kThetaOrigin + q * quarter;
  bounds[4] = kThetaOrigin + 2.0 * std::numbers::pi;

  auto add = [&](GridCell c) {
    c.summary = GridAccess::summarize(g, c);
    roots.push_back(c.id);
    cells.emplace(c.id, std::move(c));
  };
  GridCell center;
  center.id = "center";
  center.r_inner = 0.0;
  center.r_outer = r0;
  center.theta_start = bounds[0];
  center.theta_end = bounds[4];
  add(center);
  for (const char* ring : {"inner", "outer"}) {
    const bool inner = ring[0] == 'i';
    for (int q = 0; q < 4; ++q) {
      GridCell c;
      c.id = std::string(ring) + "-" + std::string(to_string(kQuadrantOrder[q]));
      c.r_inner = inner ? r0 : r1;
      c.r_outer = inner ? r1 : r2;
      c.theta_start = bounds[q];
      c.theta_end = bounds[q + 1];
      c.quadrant = kQuadrantOrder[q];
      add(c);
    }
  }
  return g;
}

AdaptiveGrid split_cell(const AdaptiveGrid& grid, std::string_view cell_id) {
  const GridCell& parent = grid.cell(cell_id);
  if (!parent.is_leaf()) fail(ErrorKind::Edit, "cell '" + parent.id + "' is already split");
  if (parent.depth >= AdaptiveGrid::kHardMaxDepth)
    fail(ErrorKind::Edit, "cell '" + parent.id + "' is at the maximum depth " +
                              std::to_string(AdaptiveGrid::kHardMaxDepth));
  AdaptiveGrid out = grid;
  auto& cells = GridAccess::cells(out);
  auto children = child_cells(parent);
  auto& p = cells.at(parent.id);
  for (auto& c : children) {
    c.summary = GridAccess::summarize(out, c);
    p.children.push_back(c.id);
    cells.emplace(c.id, std::move(c));
  }
  GridAccess::provenance(out).edits.push_back("split:" + parent.id);
  return out;
}

AdaptiveGrid merge_children(const AdaptiveGrid& grid, std::string_view cell_id) {
  const GridCell& parent = grid.cell(cell_id);
  if (parent.is_leaf()) fail(ErrorKind::Edit, "cell '" + parent.id + "' has no children to merge");
  for (const auto& id : parent.children)
    if (!grid.cell(id).is_leaf())
      fail(ErrorKind::Edit, "cannot merge '" + parent.id + "': child '" + id +
                                "' is split (merge bottom-up)");
  AdaptiveGrid out = grid;
  auto& cells = GridAccess::cells(out);
  auto& p = cells.at(parent.id);
  for (const auto& id : p.children) cells.erase(id);
  p.children.clear();
  p.summary = GridAccess::summarize(out, p);
  GridAccess::provenance(out).edits.push_back("merge:" + parent.id);
  return out;
}

double compression_ratio(const AdaptiveGrid& grid, const AcquisitionGeometry& geometry) {
  const double raw = static_cast<double>(geometry.width) * static_cast<double>(geometry.bscan_height);
  return static_cast<double>(grid.leaf_count()) / raw;
}

Mask cell_mask(const EnFaceDomain& domain, const GridCell& cell) {
  Mask m(domain.width, domain.n_bscans, 0);
  for (int iy = 0; iy < domain.n_bscans; ++iy)
    for (int ix = 0; ix < domain.width; ++ix)
      m(ix, iy) = cell_point_membership(cell, domain.to_physical(ix, iy)) ? 1 : 0;
  return m;
}

std::vector<std::string> leaf_assignment(const AdaptiveGrid& grid, const EnFaceDomain& domain) {
  std::vector<std::string> out(static_cast<std::size_t>(domain.width) * domain.n_bscans);
  for (int iy = 0; iy < domain.n_bscans; ++iy)
    for (int ix = 0; ix < domain.width; ++ix)
      if (const GridCell* c = grid.locate(domain.to_physical(ix, iy)))
        out[static_cast<std::size_t>(iy) * domain.width + ix] = c->id;
  return out;
}

}  // namespace octlayers
