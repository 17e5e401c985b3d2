#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "octlayers/attributes.hpp"
#include "octlayers/error.hpp"
#include "octlayers/render.hpp"
#include "octlayers/stats_io.hpp"

using namespace octlayers;

namespace {

AttributeMap small_map(double fill) {
  AttributeMap m;
  m.domain = octtest::geometry(6, 3, 10.0, 30.0).enface();
  m.values = Raster<double>(6, 3, fill);
  m.unit = "um";
  return m;
}

}  // namespace

TEST(Palette, Endpoints) {
  EXPECT_EQ(palette_color(Palette::Sequential, 0.0, 0.0, 1.0), (Rgb{255, 245, 240}));
  EXPECT_EQ(palette_color(Palette::Sequential, 1.0, 0.0, 1.0), (Rgb{103, 0, 13}));
  EXPECT_EQ(palette_color(Palette::Sequential, 5.0, 0.0, 1.0), (Rgb{103, 0, 13}));
  EXPECT_EQ(palette_color(Palette::Diverging, 0.0, -1.0, 1.0), (Rgb{247, 247, 247}));
  EXPECT_EQ(palette_color(Palette::Diverging, -1.0, -1.0, 1.0), (Rgb{33, 102, 172}));
  EXPECT_EQ(palette_color(Palette::Diverging, 1.0, -1.0, 1.0), (Rgb{178, 24, 43}));
  EXPECT_EQ(palette_color(Palette::Diverging, invalid_value<double>(), -1.0, 1.0), kInvalidColor);
  const Rgb darker = palette_color(Palette::Sequential, 0.8, 0.0, 1.0);
  const Rgb lighter = palette_color(Palette::Sequential, 0.2, 0.0, 1.0);
  EXPECT_LT(darker.g, lighter.g);
}

TEST(Render, ConstantMapIsUniform) {
  auto m = small_map(7.0);
  m.values(2, 1) = invalid_value<double>();
  const Image img = render_values(m.values, m.domain, {});
  EXPECT_EQ(img.width, 6);
  EXPECT_EQ(img.height, 9);  // rows repeated 3x for the 30/10 um aspect
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (x == 2 && y / 3 == 1) EXPECT_EQ(img.at(x, y), kInvalidColor);
      else EXPECT_EQ(img.at(x, y), img.at(0, 0));
    }
}

TEST(Render, ZeroDeviationIsWhite) {
  const auto m = small_map(0.0);
  DeviationMap dev{m.domain, m.values, Raster<std::uint8_t>(6, 3, 2)};
  const Image img = render_artifact(deviation_map_to_json(dev), {});
  for (const auto& p : img.pixels) EXPECT_EQ(p, (Rgb{247, 247, 247}));
}

TEST(Render, ComparisonOutlinesSignificantRegion) {
  ComparisonMap cmp;
  cmp.domain = octtest::geometry(8, 8, 10.0, 10.0).enface();
  cmp.records.resize(64);
  for (auto& r : cmp.records) r.tested = true;
  for (int y = 2; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) {
      auto& r = cmp.records[y * 8 + x];
      r.significant = true;
      r.diff = -3.0;
    }
  const Image img = render_artifact(comparison_map_to_json(cmp), {});
  EXPECT_EQ(img.at(2, 2), kOutlineColor);
  EXPECT_EQ(img.at(5, 3), kOutlineColor);
  EXPECT_EQ(img.at(3, 3), (Rgb{33, 102, 172}));
  EXPECT_EQ(img.at(0, 0), (Rgb{247, 247, 247}));
}

TEST(Render, PpmIsDeterministic) {
  const auto spec = octtest::small_spec(1);
  const auto d = generate_synthetic_cohort(spec, 1).front();
  const auto doc = attribute_map_to_json(compute_attribute_map(d, 3, AttributeKind::thickness()));
  RenderOptions ro;
  ro.range = std::pair{20.0, 50.0};
  const std::string a = encode_ppm(render_artifact(doc, ro));
  const std::string b = encode_ppm(render_artifact(doc, ro));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("P6\n128 128\n255\n", 0), 0u);
  EXPECT_EQ(a.size(), std::string("P6\n128 128\n255\n").size() + 128 * 128 * 3);
}

TEST(Render, BadArtifacts) {
  EXPECT_THROW(render_artifact(nlohmann::json::object(), {}), Error);
  EXPECT_THROW(render_artifact(nlohmann::json{{"kind", "grid"}}, {}), Error);
  EXPECT_THROW(render_artifact(nlohmann::json{{"kind", "attribute_map"}}, {}), Error);
  EXPECT_THROW(parse_palette("rainbow"), Error);
}
