#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "octlayers/grid.hpp"

namespace octlayers {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major

  Image() = default;
  Image(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

enum class Palette { Sequential, Diverging };

std::string_view to_string(Palette p);
Palette parse_palette(std::string_view text);

inline constexpr Rgb kInvalidColor{160, 160, 160};
inline constexpr Rgb kOutlineColor{0, 0, 0};
inline constexpr Rgb kCellBorderColor{255, 140, 0};

/// Sequential: light to dark red over [lo, hi]. Diverging: blue-white-red
/// with white at zero. Values outside the range saturate.
Rgb palette_color(Palette palette, double v, double lo, double hi);

struct RenderOptions {
  Palette palette = Palette::Sequential;
  std::optional<std::pair<double, double>> range;  // default: data range
  bool aspect_correct = true;  // repeat rows by round(res_bscan / res_lateral)
};

/// Rows follow B-scans, columns follow A-scans (acquisition order).
Image render_values(const Raster<double>& values, const EnFaceDomain& domain,
                    const RenderOptions& options);

/// Colors mask points that touch a non-mask 4-neighbour.
void draw_mask_outline(Image& image, const Mask& mask, Rgb color, int row_scale = 1);

/// Renders an artifact document by kind: attribute_map, comparison_map
/// (difference with significant regions outlined), deviation_map (z) or
/// cell_comparison (cell differences, significant cells bordered).
Image render_artifact(const nlohmann::json& doc, RenderOptions options);

/// Binary PPM (P6).
std::string encode_ppm(const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace octlayers
