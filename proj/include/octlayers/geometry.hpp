#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace octlayers {

enum class Eye { Right, Left };

std::string_view to_string(Eye eye);
/// Accepts "right"/"left" and the clinical "OD"/"OS" (case-insensitive).
Eye parse_eye(std::string_view text);

/// Physical en-face position in mm relative to the fovea. After laterality
/// normalization +x is always nasal; +y points along increasing B-scan index.
struct PhysicalPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
};

/// Fractional en-face lattice position (ix along a B-scan, iy across B-scans).
struct LatticePoint {
  double ix = 0.0;
  double iy = 0.0;
};

struct EnFaceDomain {
  int width = 0;
  int n_bscans = 0;
  double res_lateral_um = 0.0;
  double res_bscan_um = 0.0;
  double fovea_ix = 0.0;
  double fovea_iy = 0.0;
  Eye eye = Eye::Right;

  PhysicalPoint to_physical(double ix, double iy) const;
  LatticePoint to_lattice(PhysicalPoint p) const;

  double extent_x_mm() const { return width * res_lateral_um / 1000.0; }
  double extent_y_mm() const { return n_bscans * res_bscan_um / 1000.0; }
  double pixel_area_mm2() const { return res_lateral_um * res_bscan_um / 1.0e6; }

  /// Same lattice: shape, spacing, fovea and laterality all identical.
  bool compatible(const EnFaceDomain& other) const;

  friend bool operator==(const EnFaceDomain&, const EnFaceDomain&) = default;
};

PhysicalPoint enface_to_physical(double ix, double iy, const EnFaceDomain& domain);
LatticePoint physical_to_enface(double x_mm, double y_mm, const EnFaceDomain& domain);

struct AcquisitionGeometry {
  int width = 0;         // A-scans per B-scan
  int n_bscans = 0;      // cross-sections
  int bscan_height = 0;  // axial pixels
  double res_axial_um = 0.0;
  double res_lateral_um = 0.0;
  double res_bscan_um = 0.0;
  double fovea_ix = 0.0;
  double fovea_iy = 0.0;
  Eye eye = Eye::Right;

  /// Throws Error(Validation) listing every hard violation. Returns soft
  /// warnings for sizes outside the range seen in clinical scans.
  std::vector<std::string> validate() const;

  EnFaceDomain enface() const;

  friend bool operator==(const AcquisitionGeometry&, const AcquisitionGeometry&) = default;
};

}  // namespace octlayers
