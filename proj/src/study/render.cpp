#include "octlayers/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "octlayers/error.hpp"
#include "octlayers/regions.hpp"
#include "octlayers/stats_io.hpp"

namespace octlayers {

namespace {

Rgb mix(Rgb a, Rgb b, double t) {
  auto ch = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (y - x) * t));
  };
  return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

int row_scale_of(const EnFaceDomain& d, bool aspect) {
  if (!aspect || d.res_lateral_um <= 0.0) return 1;
  return std::clamp(static_cast<int>(std::lround(d.res_bscan_um / d.res_lateral_um)), 1, 16);
}

std::pair<double, double> data_range(const Raster<double>& values, Palette palette) {
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values.values())
    if (is_valid(v) && std::abs(v) < kInfiniteSentinel) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (lo > hi) return {0.0, 1.0};
  if (palette == Palette::Diverging) {
    const double m = std::max({std::abs(lo), std::abs(hi), 1e-12});
    return {-m, m};
  }
  if (lo == hi) return {lo, lo + 1.0};
  return {lo, hi};
}

}  // namespace

std::string_view to_string(Palette p) {
  return p == Palette::Sequential ? "sequential" : "diverging";
}

Palette parse_palette(std::string_view text) {
  if (text == "sequential") return Palette::Sequential;
  if (text == "diverging") return Palette::Diverging;
  fail(ErrorKind::Validation, "unknown palette '" + std::string(text) + "'");
}

Rgb palette_color(Palette palette, double v, double lo, double hi) {
  if (!is_valid(v)) return kInvalidColor;
  if (palette == Palette::Sequential) {
    const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    return mix({255, 245, 240}, {103, 0, 13}, t);
  }
  constexpr Rgb blue{33, 102, 172}, white{247, 247, 247}, red{178, 24, 43};
  if (v >= 0.0) return hi > 0.0 ? mix(white, red, std::clamp(v / hi, 0.0, 1.0)) : white;
  return lo < 0.0 ? mix(white, blue, std::clamp(v / lo, 0.0, 1.0)) : white;
}

Image render_values(const Raster<double>& values, const EnFaceDomain& domain,
                    const RenderOptions& options) {
  const auto [lo, hi] = options.range ? *options.range : data_range(values, options.palette);
  if (!(lo < hi) && options.palette == Palette::Sequential)
    fail(ErrorKind::Validation, "color range must satisfy lo < hi");
  const int s = row_scale_of(domain, options.aspect_correct);
  Image img(values.width(), values.height() * s);
  for (int iy = 0; iy < values.height(); ++iy)
    for (int ix = 0; ix < values.width(); ++ix) {
      const Rgb c = palette_color(options.palette, values(ix, iy), lo, hi);
      for (int k = 0; k < s; ++k) img.at(ix, iy * s + k) = c;
    }
  return img;
}

void draw_mask_outline(Image& image, const Mask& mask, Rgb color, int row_scale) {
  auto in = [&](int x, int y) { return mask.in_bounds(x, y) && mask(x, y); };
  for (int iy = 0; iy < mask.height(); ++iy)
    for (int ix = 0; ix < mask.width(); ++ix) {
      if (!mask(ix, iy)) continue;
      if (in(ix - 1, iy) && in(ix + 1, iy) && in(ix, iy - 1) && in(ix, iy + 1)) continue;
      for (int k = 0; k < row_scale; ++k) image.at(ix, iy * row_scale + k) = color;
    }
}

Image render_artifact(const nlohmann::json& doc, RenderOptions options) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
    fail(ErrorKind::Format, "artifact has no kind");
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "attribute_map") {
    const AttributeMap m = attribute_map_from_json(doc);
    return render_values(m.values, m.domain, options);
  }
  if (kind == "deviation_map") {
    const DeviationMap dev = deviation_map_from_json(doc);
    options.palette = Palette::Diverging;
    if (!options.range) options.range = std::pair{-4.0, 4.0};
    return render_values(dev.z, dev.domain, options);
  }
  if (kind == "comparison_map") {
    const ComparisonMap cmp = comparison_map_from_json(doc);
    Raster<double> diff(cmp.domain.width, cmp.domain.n_bscans, invalid_value<double>());
    for (int iy = 0; iy < diff.height(); ++iy)
      for (int ix = 0; ix < diff.width(); ++ix)
        if (cmp.at(ix, iy).tested) diff(ix, iy) = cmp.at(ix, iy).diff;
    options.palette = Palette::Diverging;
    Image img = render_values(diff, cmp.domain, options);
    draw_mask_outline(img, significance_mask(cmp), kOutlineColor,
                      row_scale_of(cmp.domain, options.aspect_correct));
    return img;
  }
  if (kind == "cell_comparison") {
    const CellComparison cmp = cell_comparison_from_json(doc);
    // Fovea-centered square lattice covering the layout.
    constexpr int n = 301;
    const double r = cmp.grid.layout().outer_radius_mm();
    EnFaceDomain d{n, n, 2000.0 * r / (n - 1), 2000.0 * r / (n - 1), (n - 1) / 2.0, (n - 1) / 2.0,
                   cmp.grid.layout().eye};
    const auto owner = leaf_assignment(cmp.grid, d);
    Raster<double> diff(n, n, invalid_value<double>());
    Mask sig(n, n, 0);
    for (std::size_t i = 0; i < owner.size(); ++i) {
      if (owner[i].empty()) continue;
      const auto& rec = cmp.at(owner[i]);
      if (rec.tested) diff.values()[i] = rec.diff;
      if (rec.significant) sig.values()[i] = 1;
    }
    options.palette = Palette::Diverging;
    options.aspect_correct = false;
    Image img = render_values(diff, d, options);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const auto& id = owner[static_cast<std::size_t>(y) * n + x];
        if (id.empty()) {
          img.at(x, y) = {255, 255, 255};
          continue;
        }
        bool edge = false;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const int u = x + dx, v = y + dy;
          if (u < 0 || v < 0 || u >= n || v >= n ||
              owner[static_cast<std::size_t>(v) * n + u] != id)
            edge = true;
        }
        if (edge) img.at(x, y) = sig(x, y) ? kCellBorderColor : Rgb{64, 64, 64};
      }
    return img;
  }
  fail(ErrorKind::Format, "cannot render artifact kind '" + kind + "'");
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size() * 3);
  for (const Rgb& p : image.pixels) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  const std::string bytes = encode_ppm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace octlayers
