#include <cmath>
#include <numbers>

#include "grid_access.hpp"
#include "octlayers/error.hpp"

namespace octlayers {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kThetaEnd = kThetaOrigin + kTwoPi;

bool is_full_circle(const GridCell& c) { return c.theta_end - c.theta_start >= kTwoPi - 1e-12; }

}  // namespace

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::Nasal: return "nasal";
    case Quadrant::Superior: return "superior";
    case Quadrant::Temporal: return "temporal";
    case Quadrant::Inferior: return "inferior";
  }
  return "?";
}

void EtdrsLayout::validate() const {
  const auto& d = diameters_mm;
  if (!(d[0] > 0.0 && d[0] < d[1] && d[1] < d[2]))
    fail(ErrorKind::Spec, "ETDRS diameters must be positive and strictly increasing");
}

double image_angle(double theta, Eye eye) {
  // Normalized frame mirrors x for left eyes; mirroring maps theta -> pi - theta.
  double a = eye == Eye::Left ? std::numbers::pi - theta : theta;
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

double canonical_angle(PhysicalPoint p) {
  double phi = std::atan2(p.y_mm, p.x_mm);
  if (phi < kThetaOrigin) phi += kTwoPi;
  if (phi >= kThetaEnd) phi = std::nextafter(kThetaEnd, 0.0);
  return phi;
}

bool cell_point_membership(const GridCell& cell, PhysicalPoint p) {
  const double r = std::hypot(p.x_mm, p.y_mm);
  if (r < cell.r_inner || r >= cell.r_outer) return false;
  if (is_full_circle(cell)) return true;
  const double phi = canonical_angle(p);
  if (cell.theta_start >= kThetaOrigin && cell.theta_end <= kThetaEnd)
    return phi >= cell.theta_start && phi < cell.theta_end;
  // Cells outside the canonical range: compare modulo 2pi.
  double d = std::fmod(phi - cell.theta_start, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d < cell.theta_end - cell.theta_start;
}

double GridCell::area_mm2() const {
  return 0.5 * (r_outer * r_outer - r_inner * r_inner) * (theta_end - theta_start);
}

PhysicalPoint GridCell::centroid() const {
  if (r_inner == 0.0 && is_full_circle(*this)) return {0.0, 0.0};
  const double r = 0.5 * (r_inner + r_outer);
  const double t = 0.5 * (theta_start + theta_end);
  return {r * std::cos(t), r * std::sin(t)};
}

std::array<GridCell, 4> child_cells(const GridCell& parent) {
  std::array<GridCell, 4> out;
  for (int k = 0; k < 4; ++k) {
    auto& c = out[k];
    c.id = parent.id + "/" + std::to_string(k);
    c.depth = parent.depth + 1;
    c.quadrant = parent.quadrant;
  }
  if (is_full_circle(parent)) {
    // The central disc first splits into its four quadrant sectors.
    const double span = parent.theta_end - parent.theta_start;
    for (int k = 0; k < 4; ++k) {
      auto& c = out[k];
      c.r_inner = parent.r_inner;
      c.r_outer = parent.r_outer;
      c.theta_start = k == 0 ? parent.theta_start : parent.theta_start + k * span / 4.0;
      c.theta_end = k == 3 ? parent.theta_end : parent.theta_start + (k + 1) * span / 4.0;
      c.quadrant = static_cast<Quadrant>(k);
    }
    return out;
  }
  const double r_mid = 0.5 * (parent.r_inner + parent.r_outer);
  const double t_mid = 0.5 * (parent.theta_start + parent.theta_end);
  for (int k = 0; k < 4; ++k) {
    auto& c = out[k];
    const bool outer = k >= 2, upper = k % 2 == 1;
    c.r_inner = outer ? r_mid : parent.r_inner;
    c.r_outer = outer ? parent.r_outer : r_mid;
    c.theta_start = upper ? t_mid : parent.theta_start;
    c.theta_end = upper ? parent.theta_end : t_mid;
  }
  return out;
}

}  // namespace octlayers
