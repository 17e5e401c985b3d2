#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "octlayers/dataset.hpp"

namespace octlayers {

enum class AttributeType { Thickness, Curvature, Reflectivity };
enum class BoundarySide { Upper, Lower };

/// Which per-point property to compute, with its parameters.
struct AttributeKind {
  AttributeType type = AttributeType::Thickness;
  BoundarySide side = BoundarySide::Upper;  // curvature only
  int stencil = 1;                          // curvature only, lattice steps
  bool normalize = true;                    // reflectivity only, divide by 255

  static AttributeKind thickness() { return {}; }
  static AttributeKind curvature(BoundarySide side = BoundarySide::Upper, int stencil = 1) {
    return {AttributeType::Curvature, side, stencil, true};
  }
  static AttributeKind reflectivity(bool normalize = true) {
    return {AttributeType::Reflectivity, BoundarySide::Upper, 1, normalize};
  }

  /// Stable name: "thickness", "curvature", "curvature_lower", "reflectivity",
  /// "reflectivity_raw"; a non-default stencil appends ":<n>".
  std::string name() const;
  /// "um", "1/mm", "normalized" or "intensity".
  std::string unit() const;
  /// Inverse of name().
  static AttributeKind parse(std::string_view text);

  friend bool operator==(const AttributeKind&, const AttributeKind&) = default;
};

struct AttributeMap {
  int layer_id = 0;
  AttributeKind kind;
  Raster<double> values;  // NaN = invalid
  EnFaceDomain domain;
  std::string unit;

  bool valid(int ix, int iy) const { return is_valid(values(ix, iy)); }
  std::size_t valid_count() const;

  friend bool operator==(const AttributeMap&, const AttributeMap&) = default;
};

/// Layer thickness in µm at one A-scan; NaN if either boundary is invalid.
double thickness_at(const Segmentation& segmentation, int layer_id, int ix, int iy,
                    const AcquisitionGeometry& geometry);

/// Mean curvature (1/mm) of a height field sampled in mm on a lattice with
/// spacings dx_mm, dy_mm. Central differences over `stencil` lattice steps.
/// NaN at the border or where any of the 3x3 stencil samples is invalid.
/// Positive where the surface is convex toward smaller heights.
double mean_curvature_of_heights(const Raster<double>& z_mm, int ix, int iy, double dx_mm,
                                 double dy_mm, int stencil = 1);

/// Mean curvature of a boundary surface in physical units (1/mm).
double mean_curvature_at(const BoundarySurface& boundary, int ix, int iy,
                         const AcquisitionGeometry& geometry, int stencil = 1);

/// Mean intensity over axial rows in [upper, lower) of the layer, optionally
/// divided by 255. NaN for invalid boundaries or thickness below 1 px.
double mean_reflectivity_at(const Volume& volume, const Segmentation& segmentation, int layer_id,
                            int ix, int iy, bool normalize = true);

/// Throws Error(Range) for a bad layer id and Error(Capability) when
/// reflectivity is requested without a volume.
AttributeMap compute_attribute_map(const Dataset& dataset, int layer_id, const AttributeKind& kind);

struct ProfilePoint {
  int ix = 0;
  std::optional<double> value;
};

/// Row iy of the map (one B-scan), invalid points as empty optionals.
std::vector<ProfilePoint> attribute_profile(const AttributeMap& map, int iy);

/// Resolves a layer by index ("3") or by name (case-insensitive).
int resolve_layer(const Segmentation& segmentation, std::string_view selector);

}  // namespace octlayers
