#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "octlayers/attributes.hpp"

namespace octlayers {

enum class Quadrant { Nasal, Superior, Temporal, Inferior };

std::string_view to_string(Quadrant q);

/// ETDRS layout: three concentric circles and four quadrants bounded by the
/// diagonals. Angles live in the normalized frame (0 rad = nasal, CCW), so
/// the layout is the same for both eyes; `eye` only affects how quadrants
/// map back onto the unmirrored en-face image.
struct EtdrsLayout {
  std::array<double, 3> diameters_mm{1.0, 3.0, 6.0};
  Eye eye = Eye::Right;

  void validate() const;
  double outer_radius_mm() const { return diameters_mm[2] / 2.0; }

  friend bool operator==(const EtdrsLayout&, const EtdrsLayout&) = default;
};

/// Start of the canonical angular range [-pi/4, 7pi/4) every cell lives in.
inline constexpr double kThetaOrigin = -0.78539816339744830962;

/// Angle of a normalized-frame direction as it appears in the en-face image
/// (ix to the right, iy down the stack); mirrored for left eyes.
double image_angle(double theta, Eye eye);

/// Canonical polar angle of p in [kThetaOrigin, kThetaOrigin + 2pi).
double canonical_angle(PhysicalPoint p);

struct CellSummary {
  std::size_t n_valid = 0;
  std::size_t n_total = 0;  // lattice points inside the cell, valid or not
  double mean = 0.0;
  double sd = 0.0;  // sample SD; 0 when n_valid < 2
  double min = 0.0;
  double max = 0.0;
  double coverage = 0.0;
  bool reliable = false;
  /// Common grids: SD across subjects of the per-subject cell means.
  std::optional<double> between_subject_sd;
  std::size_t n_subjects = 0;

  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

/// n_valid, mean, sample SD, min and max of a sample; other fields untouched.
void describe_values(std::span<const double> values, CellSummary& out);

struct SummaryThresholds {
  double min_coverage = 0.5;
  std::size_t min_valid = 8;
};

struct GridCell {
  std::string id;
  double r_inner = 0.0;
  double r_outer = 0.0;
  double theta_start = 0.0;
  double theta_end = 0.0;
  int depth = 0;
  Quadrant quadrant = Quadrant::Nasal;  // base ancestor quadrant; center: nasal, its subtree by sector
  std::vector<std::string> children;
  std::optional<CellSummary> summary;

  bool is_leaf() const { return children.empty(); }
  double area_mm2() const;
  PhysicalPoint centroid() const;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// r_inner <= |p| < r_outer and the angle of p in [theta_start, theta_end).
/// The origin belongs to any cell with r_inner = 0 whose range covers angle 0.
bool cell_point_membership(const GridCell& cell, PhysicalPoint p);

/// The data a grid's summaries are computed from. For common grids `map` is
/// the group-mean map and `subjects` the member maps.
struct SummarySource {
  AttributeMap map;
  std::vector<AttributeMap> subjects;
  SummaryThresholds thresholds;
};

struct GridProvenance {
  std::vector<std::string> edits;  // "split:<id>" / "merge:<id>", in order
  std::optional<double> sd_threshold;
  std::optional<int> max_depth;
  std::optional<std::size_t> min_points;
};

namespace detail {
struct GridAccess;
}

/// Polar quadtree over the ETDRS layout. Value type; edits return new grids.
class AdaptiveGrid {
 public:
  static constexpr int kHardMaxDepth = 6;

  AdaptiveGrid() = default;

  const EtdrsLayout& layout() const { return layout_; }
  const std::vector<std::string>& roots() const { return roots_; }
  const std::map<std::string, GridCell>& cells() const { return cells_; }
  const GridProvenance& provenance() const { return provenance_; }
  const std::shared_ptr<const SummarySource>& source() const { return source_; }

  bool contains(std::string_view id) const;
  /// Throws Error(Range) for unknown ids.
  const GridCell& cell(std::string_view id) const;

  /// Leaves in depth-first order from the roots (deterministic).
  std::vector<std::string> leaf_ids() const;
  std::size_t leaf_count() const;

  /// The leaf containing p, or nullptr outside the layout.
  const GridCell* locate(PhysicalPoint p) const;

  /// Checks tree well-formedness and exact child tiling; throws Error(Validation).
  void check_invariants() const;

  /// Equal layout, tree and summaries; provenance is not compared.
  friend bool operator==(const AdaptiveGrid& a, const AdaptiveGrid& b) {
    return a.layout_ == b.layout_ && a.roots_ == b.roots_ && a.cells_ == b.cells_;
  }

 private:
  friend struct detail::GridAccess;

  EtdrsLayout layout_;
  std::vector<std::string> roots_;
  std::map<std::string, GridCell> cells_;
  GridProvenance provenance_;
  std::shared_ptr<const SummarySource> source_;
};

/// The 9 ETDRS regions. Ids: "center", "inner-<quadrant>", "outer-<quadrant>".
/// With a source, every cell carries a summary.
AdaptiveGrid etdrs_base_grid(const EtdrsLayout& layout,
                             std::shared_ptr<const SummarySource> source = nullptr);

CellSummary summarize_cell(const AttributeMap& map, const GridCell& cell,
                           const SummaryThresholds& thresholds = {});
/// As above, restricted to points where `include` is valid (NaN excluded).
CellSummary summarize_cell(const AttributeMap& map, const GridCell& cell,
                           const Raster<double>& include, const SummaryThresholds& thresholds);

/// Geometry of the 4 children a split would create (ids included).
std::array<GridCell, 4> child_cells(const GridCell& parent);

/// Throws Error(Edit) unless the cell is a leaf below the hard depth limit.
AdaptiveGrid split_cell(const AdaptiveGrid& grid, std::string_view cell_id);
/// Throws Error(Edit) unless all children of the cell are leaves.
AdaptiveGrid merge_children(const AdaptiveGrid& grid, std::string_view cell_id);

inline constexpr std::size_t kDefaultMinPoints = 16;

/// Greedy top-down refinement: split any leaf whose SD exceeds the threshold
/// while below max_depth and every child would keep >= min_points valid
/// points. Existing splits are kept.
AdaptiveGrid refine_grid(const AdaptiveGrid& grid, double sd_threshold, int max_depth,
                         std::size_t min_points = kDefaultMinPoints);

AdaptiveGrid fit_grid(const AttributeMap& map, double sd_threshold, int max_depth,
                      std::size_t min_points = kDefaultMinPoints,
                      const SummaryThresholds& thresholds = {});

/// Point-wise group mean; a point is valid iff valid in at least half the maps.
AttributeMap group_mean_map(std::span<const AttributeMap> maps);

AdaptiveGrid fit_common_grid(std::span<const AttributeMap> maps, double sd_threshold, int max_depth,
                             std::size_t min_points = kDefaultMinPoints,
                             const SummaryThresholds& thresholds = {});

/// Leaf count over the raw values of one B-scan (width x bscan_height).
double compression_ratio(const AdaptiveGrid& grid, const AcquisitionGeometry& geometry);

/// Lattice mask of the points inside one cell.
Mask cell_mask(const EnFaceDomain& domain, const GridCell& cell);

/// Leaf id per lattice point (empty string outside the layout).
std::vector<std::string> leaf_assignment(const AdaptiveGrid& grid, const EnFaceDomain& domain);

}  // namespace octlayers
