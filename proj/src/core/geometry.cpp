#include "octlayers/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "octlayers/error.hpp"

namespace octlayers {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format: return "format";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Range: return "range";
    case ErrorKind::Capability: return "capability";
    case ErrorKind::Edit: return "edit";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InsufficientData: return "insufficient_data";
    case ErrorKind::Selection: return "selection";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string_view to_string(Eye eye) { return eye == Eye::Right ? "right" : "left"; }

Eye parse_eye(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "right" || s == "od") return Eye::Right;
  if (s == "left" || s == "os") return Eye::Left;
  fail(ErrorKind::Format, "unknown eye laterality '" + std::string(text) + "'");
}

PhysicalPoint EnFaceDomain::to_physical(double ix, double iy) const {
  double x = (ix - fovea_ix) * res_lateral_um / 1000.0;
  const double y = (iy - fovea_iy) * res_bscan_um / 1000.0;
  if (eye == Eye::Left) x = -x;
  return {x, y};
}

LatticePoint EnFaceDomain::to_lattice(PhysicalPoint p) const {
  const double x = eye == Eye::Left ? -p.x_mm : p.x_mm;
  return {fovea_ix + x * 1000.0 / res_lateral_um, fovea_iy + p.y_mm * 1000.0 / res_bscan_um};
}

bool EnFaceDomain::compatible(const EnFaceDomain& other) const { return *this == other; }

PhysicalPoint enface_to_physical(double ix, double iy, const EnFaceDomain& domain) {
  return domain.to_physical(ix, iy);
}

LatticePoint physical_to_enface(double x_mm, double y_mm, const EnFaceDomain& domain) {
  return domain.to_lattice({x_mm, y_mm});
}

std::vector<std::string> AcquisitionGeometry::validate() const {
  std::vector<std::string> errors;
  if (width < 2) errors.push_back("width must be >= 2, found " + std::to_string(width));
  if (n_bscans < 2) errors.push_back("n_bscans must be >= 2, found " + std::to_string(n_bscans));
  if (bscan_height < 1)
    errors.push_back("bscan_height must be >= 1, found " + std::to_string(bscan_height));
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(std::string(name) + " must be > 0");
  };
  positive(res_axial_um, "res_axial_um");
  positive(res_lateral_um, "res_lateral_um");
  positive(res_bscan_um, "res_bscan_um");
  if (!(fovea_ix >= 0.0 && fovea_ix <= width - 1))
    errors.push_back("fovea_ix " + std::to_string(fovea_ix) + " outside lattice");
  if (!(fovea_iy >= 0.0 && fovea_iy <= n_bscans - 1))
    errors.push_back("fovea_iy " + std::to_string(fovea_iy) + " outside lattice");
  if (!errors.empty()) {
    std::string first = errors.front();
    fail(ErrorKind::Validation, "invalid acquisition geometry: " + first, std::move(errors));
  }

  std::vector<std::string> warnings;
  if (width < 512 || width > 1024)
    warnings.push_back("width " + std::to_string(width) + " outside typical range 512-1024");
  if (n_bscans < 19 || n_bscans > 241)
    warnings.push_back("n_bscans " + std::to_string(n_bscans) + " outside typical range 19-241");
  return warnings;
}

EnFaceDomain AcquisitionGeometry::enface() const {
  return {width, n_bscans, res_lateral_um, res_bscan_um, fovea_ix, fovea_iy, eye};
}

}  // namespace octlayers
