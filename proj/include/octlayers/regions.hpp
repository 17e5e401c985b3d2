#pragma once

#include <vector>

#include "octlayers/comparison.hpp"

namespace octlayers {

struct LatticeIndex {
  int ix = 0;
  int iy = 0;
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
  friend auto operator<=>(const LatticeIndex&, const LatticeIndex&) = default;
};

using Polygon = std::vector<PhysicalPoint>;

struct Region {
  int id = 0;
  std::vector<LatticeIndex> points;  // sorted by (iy, ix)
  double area_mm2 = 0.0;
  PhysicalPoint centroid;
  double mean_diff = 0.0;
  double min_p = 1.0;
  /// Closed pixel-edge outlines in mm (outer boundary first, then holes).
  std::vector<Polygon> outlines;
};

/// 8-connected components of a mask, each sorted by (iy, ix); components are
/// ordered by their first point.
std::vector<std::vector<LatticeIndex>> connected_components(const Mask& mask);

/// Boundary loops of a pixel set along pixel edges, in lattice units
/// (corners at half-integer positions). Diagonal contacts are joined.
std::vector<std::vector<LatticePoint>> trace_outlines(const Mask& mask);

/// Deterministic order: area descending, then centroid x, then y.
std::vector<Region> extract_significant_regions(const ComparisonMap& cmp);

Mask significance_mask(const ComparisonMap& cmp);
Mask region_mask(const EnFaceDomain& domain, const Region& region);

}  // namespace octlayers
