#include "octlayers/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "octlayers/error.hpp"

namespace octlayers {

std::string AttributeKind::name() const {
  std::string base;
  switch (type) {
    case AttributeType::Thickness: return "thickness";
    case AttributeType::Curvature:
      base = side == BoundarySide::Upper ? "curvature" : "curvature_lower";
      if (stencil != 1) base += ":" + std::to_string(stencil);
      return base;
    case AttributeType::Reflectivity: return normalize ? "reflectivity" : "reflectivity_raw";
  }
  return "unknown";
}

std::string AttributeKind::unit() const {
  switch (type) {
    case AttributeType::Thickness: return "um";
    case AttributeType::Curvature: return "1/mm";
    case AttributeType::Reflectivity: return normalize ? "normalized" : "intensity";
  }
  return "";
}

AttributeKind AttributeKind::parse(std::string_view text) {
  std::string_view head = text;
  int stencil = 1;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    const auto tail = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), stencil);
    if (ec != std::errc() || ptr != tail.data() + tail.size() || stencil < 1)
      fail(ErrorKind::Spec, "bad stencil in attribute '" + std::string(text) + "'");
  }
  if (head == "thickness") return thickness();
  if (head == "curvature" || head == "curvature_upper")
    return curvature(BoundarySide::Upper, stencil);
  if (head == "curvature_lower") return curvature(BoundarySide::Lower, stencil);
  if (head == "reflectivity") return reflectivity(true);
  if (head == "reflectivity_raw") return reflectivity(false);
  fail(ErrorKind::Spec, "unknown attribute '" + std::string(text) + "'");
}

std::size_t AttributeMap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.values().begin(), values.values().end(), [](double v) {
        return is_valid(v);
      }));
}

double thickness_at(const Segmentation& seg, int layer_id, int ix, int iy,
                    const AcquisitionGeometry& geometry) {
  const double upper = seg.boundaries[layer_id](ix, iy);
  const double lower = seg.boundaries[layer_id + 1](ix, iy);
  if (std::isnan(upper) || std::isnan(lower)) return invalid_value<double>();
  return (lower - upper) * geometry.res_axial_um;
}

double mean_curvature_of_heights(const Raster<double>& z, int ix, int iy, double dx, double dy,
                                 int s) {
  if (ix - s < 0 || iy - s < 0 || ix + s >= z.width() || iy + s >= z.height())
    return invalid_value<double>();
  double n[3][3];
  for (int j = -1; j <= 1; ++j) {
    for (int i = -1; i <= 1; ++i) {
      const double v = z(ix + i * s, iy + j * s);
      if (std::isnan(v)) return invalid_value<double>();
      n[j + 1][i + 1] = v;
    }
  }
  const double hx = dx * s, hy = dy * s;
  const double zx = (n[1][2] - n[1][0]) / (2.0 * hx);
  const double zy = (n[2][1] - n[0][1]) / (2.0 * hy);
  const double zxx = (n[1][2] - 2.0 * n[1][1] + n[1][0]) / (hx * hx);
  const double zyy = (n[2][1] - 2.0 * n[1][1] + n[0][1]) / (hy * hy);
  const double zxy = (n[2][2] - n[2][0] - n[0][2] + n[0][0]) / (4.0 * hx * hy);
  const double g = 1.0 + zx * zx + zy * zy;
  return ((1.0 + zx * zx) * zyy - 2.0 * zx * zy * zxy + (1.0 + zy * zy) * zxx) /
         (2.0 * std::pow(g, 1.5));
}

namespace {

Raster<double> heights_mm(const BoundarySurface& boundary, double res_axial_um) {
  Raster<double> z(boundary.width(), boundary.height());
  auto dst = z.values();
  auto src = boundary.values();
  const double scale = res_axial_um / 1000.0;
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = std::isnan(src[i]) ? invalid_value<double>() : static_cast<double>(src[i]) * scale;
  return z;
}

}  // namespace

double mean_curvature_at(const BoundarySurface& boundary, int ix, int iy,
                         const AcquisitionGeometry& geometry, int stencil) {
  // Only the stencil neighbourhood is needed; copy it into a small patch.
  const int s = stencil;
  if (ix - s < 0 || iy - s < 0 || ix + s >= boundary.width() || iy + s >= boundary.height())
    return invalid_value<double>();
  Raster<double> patch(2 * s + 1, 2 * s + 1, invalid_value<double>());
  const double scale = geometry.res_axial_um / 1000.0;
  for (int j = -s; j <= s; j += s)
    for (int i = -s; i <= s; i += s) {
      const float v = boundary(ix + i, iy + j);
      patch(i + s, j + s) = std::isnan(v) ? invalid_value<double>() : v * scale;
    }
  return mean_curvature_of_heights(patch, s, s, geometry.res_lateral_um / 1000.0,
                                   geometry.res_bscan_um / 1000.0, s);
}

double mean_reflectivity_at(const Volume& volume, const Segmentation& seg, int layer_id, int ix,
                            int iy, bool normalize) {
  const double upper = seg.boundaries[layer_id](ix, iy);
  const double lower = seg.boundaries[layer_id + 1](ix, iy);
  if (std::isnan(upper) || std::isnan(lower) || lower - upper < 1.0) return invalid_value<double>();
  const int first = std::max(0, static_cast<int>(std::ceil(upper)));
  const int end = std::min(volume.bscan_height(), static_cast<int>(std::ceil(lower)));
  if (end <= first) return invalid_value<double>();
  double sum = 0.0;
  for (int row = first; row < end; ++row) sum += volume.at(ix, row, iy);
  const double mean = sum / (end - first);
  return normalize ? mean / 255.0 : mean;
}

AttributeMap compute_attribute_map(const Dataset& dataset, int layer_id, const AttributeKind& kind) {
  const auto& seg = dataset.segmentation;
  const auto& g = dataset.geometry;
  if (layer_id < 0 || layer_id >= seg.layer_count())
    fail(ErrorKind::Range, "layer id " + std::to_string(layer_id) + " out of range [0, " +
                               std::to_string(seg.layer_count()) + ")");
  if (kind.type == AttributeType::Reflectivity && !dataset.volume)
    fail(ErrorKind::Capability, "dataset " + dataset.id + " has no volume; reflectivity unavailable");
  if (kind.type == AttributeType::Curvature && kind.stencil < 1)
    fail(ErrorKind::Spec, "curvature stencil must be >= 1");

  AttributeMap map;
  map.layer_id = layer_id;
  map.kind = kind;
  map.domain = g.enface();
  map.unit = kind.unit();
  map.values = Raster<double>(g.width, g.n_bscans, invalid_value<double>());

  switch (kind.type) {
    case AttributeType::Thickness:
      for (int iy = 0; iy < g.n_bscans; ++iy)
        for (int ix = 0; ix < g.width; ++ix)
          map.values(ix, iy) = thickness_at(seg, layer_id, ix, iy, g);
      break;
    case AttributeType::Curvature: {
      const int boundary = kind.side == BoundarySide::Upper ? layer_id : layer_id + 1;
      const Raster<double> z = heights_mm(seg.boundaries[boundary], g.res_axial_um);
      const double dx = g.res_lateral_um / 1000.0, dy = g.res_bscan_um / 1000.0;
      for (int iy = 0; iy < g.n_bscans; ++iy)
        for (int ix = 0; ix < g.width; ++ix)
          map.values(ix, iy) = mean_curvature_of_heights(z, ix, iy, dx, dy, kind.stencil);
      break;
    }
    case AttributeType::Reflectivity:
      for (int iy = 0; iy < g.n_bscans; ++iy)
        for (int ix = 0; ix < g.width; ++ix)
          map.values(ix, iy) =
              mean_reflectivity_at(*dataset.volume, seg, layer_id, ix, iy, kind.normalize);
      break;
  }
  return map;
}

std::vector<ProfilePoint> attribute_profile(const AttributeMap& map, int iy) {
  if (iy < 0 || iy >= map.values.height())
    fail(ErrorKind::Range, "B-scan index " + std::to_string(iy) + " out of range [0, " +
                               std::to_string(map.values.height()) + ")");
  std::vector<ProfilePoint> out;
  out.reserve(map.values.width());
  const auto row = map.values.row(iy);
  for (int ix = 0; ix < map.values.width(); ++ix) {
    ProfilePoint p{ix, std::nullopt};
    if (is_valid(row[ix])) p.value = row[ix];
    out.push_back(p);
  }
  return out;
}

int resolve_layer(const Segmentation& seg, std::string_view selector) {
  int index = -1;
  auto [ptr, ec] = std::from_chars(selector.data(), selector.data() + selector.size(), index);
  if (ec == std::errc() && ptr == selector.data() + selector.size()) {
    if (index < 0 || index >= seg.layer_count())
      fail(ErrorKind::Range, "layer index " + std::string(selector) + " out of range");
    return index;
  }
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string want = lower(selector);
  for (int k = 0; k < seg.layer_count(); ++k)
    if (lower(seg.layer_names[k]) == want) return k;
  fail(ErrorKind::Range, "unknown layer '" + std::string(selector) + "'");
}

}  // namespace octlayers
