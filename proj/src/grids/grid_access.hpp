#pragma once

#include "octlayers/grid.hpp"

namespace octlayers::detail {

// Mutable view used by the grid operations; AdaptiveGrid is immutable to users.
struct GridAccess {
  static EtdrsLayout& layout(AdaptiveGrid& g) { return g.layout_; }
  static std::vector<std::string>& roots(AdaptiveGrid& g) { return g.roots_; }
  static std::map<std::string, GridCell>& cells(AdaptiveGrid& g) { return g.cells_; }
  static GridProvenance& provenance(AdaptiveGrid& g) { return g.provenance_; }
  static std::shared_ptr<const SummarySource>& source(AdaptiveGrid& g) { return g.source_; }

  /// Summary of `cell` from the grid's source (nullopt without a source).
  static std::optional<CellSummary> summarize(const AdaptiveGrid& g, const GridCell& cell);
};

}  // namespace octlayers::detail
