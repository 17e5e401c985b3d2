#include "octlayers/stats_io.hpp"

#include <cmath>
#include <functional>

#include "octlayers/encoding.hpp"
#include "octlayers/error.hpp"
#include "octlayers/grid_io.hpp"

namespace octlayers {

using nlohmann::json;

namespace {

void expect_kind(const json& doc, std::string_view kind) {
  if (!doc.is_object() || !doc.contains("kind") || doc["kind"] != kind)
    fail(ErrorKind::Format, "expected a " + std::string(kind) + " document");
}

template <typename T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) return number_or_null(*v);
  else return *v;
}

double number_or_nan(const json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

ComparisonRecord record_from_json(const json& j) {
  ComparisonRecord r;
  r.tested = j.at("tested").get<bool>();
  r.n_p = j.at("n_p").get<std::size_t>();
  r.n_c = j.at("n_c").get<std::size_t>();
  if (r.tested) {
    r.mean_p = number_or_nan(j.at("mean_p"));
    r.mean_c = number_or_nan(j.at("mean_c"));
    r.diff = number_or_nan(j.at("diff"));
    r.statistic = number_or_nan(j.at("statistic"));
    r.p = number_or_nan(j.at("p"));
    r.d = number_or_nan(j.at("d"));
    r.significant = j.at("significant").get<bool>();
  }
  return r;
}

}  // namespace

json to_json(const TestResult& r) {
  return {{"test", std::string(to_string(r.kind))},
          {"statistic", number_or_null(r.statistic)},
          {"df", r.df ? number_or_null(*r.df) : json(nullptr)},
          {"p", number_or_null(r.p)}};
}

json to_json(const CompareConfig& c) {
  return {{"test", std::string(to_string(c.test))},
          {"alpha", c.alpha},
          {"correction", std::string(to_string(c.correction))},
          {"min_samples", c.min_samples}};
}

CompareConfig compare_config_from_json(const json& j) {
  CompareConfig c;
  if (!j.is_object()) fail(ErrorKind::Validation, "comparison config must be an object");
  try {
    if (j.contains("test")) c.test = parse_test_kind(j["test"].get<std::string>());
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("correction")) c.correction = parse_correction(j["correction"].get<std::string>());
    if (j.contains("min_samples")) c.min_samples = j["min_samples"].get<int>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("bad comparison config: ") + e.what());
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail(ErrorKind::Validation, "alpha must be in (0, 1)");
  if (c.min_samples < 3) fail(ErrorKind::Validation, "min_samples must be >= 3");
  return c;
}

json to_json(const ComparisonRecord& r) {
  json j = {{"tested", r.tested}, {"n_p", r.n_p}, {"n_c", r.n_c}};
  if (r.tested) {
    j["mean_p"] = number_or_null(r.mean_p);
    j["mean_c"] = number_or_null(r.mean_c);
    j["diff"] = number_or_null(r.diff);
    j["statistic"] = number_or_null(r.statistic);
    j["p"] = number_or_null(r.p);
    j["d"] = number_or_null(r.d);
    j["significant"] = r.significant;
  } else {
    for (const char* k : {"mean_p", "mean_c", "diff", "statistic", "p", "d"}) j[k] = nullptr;
    j["significant"] = false;
  }
  return j;
}

json to_json(const MeasurementSummary& m) {
  json j = {{"n", m.n},
            {"n_points", m.n_points},
            {"mean", m.n ? number_or_null(m.mean) : json(nullptr)},
            {"sd", m.n > 1 ? number_or_null(m.sd) : json(nullptr)},
            {"min", m.n ? number_or_null(m.min) : json(nullptr)},
            {"max", m.n ? number_or_null(m.max) : json(nullptr)},
            {"area_mm2", m.area_mm2},
            {"mean_diff", opt(m.mean_diff)}};
  if (m.n_p || m.n_c) {
    j["n_p"] = opt(m.n_p);
    j["n_c"] = opt(m.n_c);
    j["mean_p"] = opt(m.mean_p);
    j["mean_c"] = opt(m.mean_c);
    j["p"] = opt(m.p);
    j["effect_size"] = opt(m.effect_size);
    j["statistic"] = opt(m.statistic);
    j["test"] = m.test ? json(std::string(to_string(*m.test))) : json(nullptr);
  }
  return j;
}

json to_json(const Region& r) {
  json outlines = json::array();
  for (const auto& poly : r.outlines) {
    json pts = json::array();
    for (const auto& p : poly) pts.push_back({p.x_mm, p.y_mm});
    outlines.push_back(std::move(pts));
  }
  return {{"id", r.id},
          {"n_points", r.points.size()},
          {"area_mm2", r.area_mm2},
          {"centroid_mm", {r.centroid.x_mm, r.centroid.y_mm}},
          {"mean_diff", number_or_null(r.mean_diff)},
          {"min_p", number_or_null(r.min_p)},
          {"outlines_mm", std::move(outlines)}};
}

json attribute_map_to_json(const AttributeMap& map) {
  return {{"kind", "attribute_map"},
          {"layer_id", map.layer_id},
          {"attribute", map.kind.name()},
          {"unit", map.unit},
          {"domain", to_json(map.domain)},
          {"values", encode_values(map.values)}};
}

AttributeMap attribute_map_from_json(const json& doc) {
  expect_kind(doc, "attribute_map");
  try {
    AttributeMap m;
    m.layer_id = doc.at("layer_id").get<int>();
    m.kind = AttributeKind::parse(doc.at("attribute").get<std::string>());
    m.unit = doc.at("unit").get<std::string>();
    m.domain = domain_from_json(doc.at("domain"));
    m.values = decode_values(doc.at("values"));
    if (m.values.width() != m.domain.width || m.values.height() != m.domain.n_bscans)
      fail(ErrorKind::Format, "attribute map values do not match the domain");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed attribute map: ") + e.what());
  }
}

json comparison_map_to_json(const ComparisonMap& cmp) {
  const int w = cmp.domain.width, h = cmp.domain.n_bscans;
  auto layer = [&](const std::function<double(const ComparisonRecord&)>& f) {
    Raster<double> r(w, h, invalid_value<double>());
    for (int iy = 0; iy < h; ++iy)
      for (int ix = 0; ix < w; ++ix)
        if (const auto& rec = cmp.at(ix, iy); rec.tested) r(ix, iy) = f(rec);
    return encode_values(r);
  };
  Raster<std::uint8_t> tested(w, h, 0), significant(w, h, 0);
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      tested(ix, iy) = cmp.at(ix, iy).tested ? 1 : 0;
      significant(ix, iy) = cmp.at(ix, iy).significant ? 1 : 0;
    }
  return {{"kind", "comparison_map"},
          {"layer_id", cmp.layer_id},
          {"attribute", cmp.kind.name()},
          {"domain", to_json(cmp.domain)},
          {"config", to_json(cmp.config)},
          {"threshold", cmp.threshold},
          {"tested_count", cmp.tested_count},
          {"significant_count", cmp.significant_count},
          {"layers",
           {{"diff", layer([](const auto& r) { return r.diff; })},
            {"p", layer([](const auto& r) { return r.p; })},
            {"d", layer([](const auto& r) { return r.d; })},
            {"statistic", layer([](const auto& r) { return r.statistic; })},
            {"mean_p", layer([](const auto& r) { return r.mean_p; })},
            {"mean_c", layer([](const auto& r) { return r.mean_c; })},
            {"n_p", layer([](const auto& r) { return static_cast<double>(r.n_p); })},
            {"n_c", layer([](const auto& r) { return static_cast<double>(r.n_c); })},
            {"tested", encode_bytes(tested)},
            {"significant", encode_bytes(significant)}}}};
}

ComparisonMap comparison_map_from_json(const json& doc) {
  expect_kind(doc, "comparison_map");
  try {
    ComparisonMap cmp;
    cmp.layer_id = doc.at("layer_id").get<int>();
    cmp.kind = AttributeKind::parse(doc.at("attribute").get<std::string>());
    cmp.domain = domain_from_json(doc.at("domain"));
    cmp.config = compare_config_from_json(doc.at("config"));
    cmp.threshold = doc.at("threshold").get<double>();
    cmp.tested_count = doc.at("tested_count").get<std::size_t>();
    cmp.significant_count = doc.at("significant_count").get<std::size_t>();
    const auto& L = doc.at("layers");
    const auto diff = decode_values(L.at("diff")), p = decode_values(L.at("p")),
               d = decode_values(L.at("d")), stat = decode_values(L.at("statistic")),
               mp = decode_values(L.at("mean_p")), mc = decode_values(L.at("mean_c")),
               np = decode_values(L.at("n_p")), nc = decode_values(L.at("n_c"));
    const auto tested = decode_bytes(L.at("tested")), sig = decode_bytes(L.at("significant"));
    const int w = cmp.domain.width, h = cmp.domain.n_bscans;
    for (const auto* r : {&diff, &p, &d, &stat, &mp, &mc, &np, &nc})
      if (r->width() != w || r->height() != h)
        fail(ErrorKind::Format, "comparison layer does not match the domain");
    if (tested.width() != w || tested.height() != h || sig.width() != w || sig.height() != h)
      fail(ErrorKind::Format, "comparison layer does not match the domain");
    cmp.records.resize(static_cast<std::size_t>(w) * h);
    for (int iy = 0; iy < h; ++iy)
      for (int ix = 0; ix < w; ++ix) {
        auto& r = cmp.records[static_cast<std::size_t>(iy) * w + ix];
        r.tested = tested(ix, iy) != 0;
        if (!r.tested) continue;
        r.diff = diff(ix, iy);
        r.p = p(ix, iy);
        r.d = d(ix, iy);
        r.statistic = stat(ix, iy);
        r.mean_p = mp(ix, iy);
        r.mean_c = mc(ix, iy);
        r.n_p = static_cast<std::size_t>(np(ix, iy));
        r.n_c = static_cast<std::size_t>(nc(ix, iy));
        r.significant = sig(ix, iy) != 0;
      }
    return cmp;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed comparison map: ") + e.what());
  }
}

json cell_comparison_to_json(const CellComparison& cmp) {
  json cells = json::array();
  for (std::size_t i = 0; i < cmp.cell_ids.size(); ++i) {
    json j = to_json(cmp.records[i]);
    j["cell_id"] = cmp.cell_ids[i];
    cells.push_back(std::move(j));
  }
  return {{"kind", "cell_comparison"},
          {"config", to_json(cmp.config)},
          {"threshold", cmp.threshold},
          {"grid", grid_to_json(cmp.grid)},
          {"cells", std::move(cells)}};
}

CellComparison cell_comparison_from_json(const json& doc) {
  expect_kind(doc, "cell_comparison");
  try {
    CellComparison cmp{grid_from_json(doc.at("grid")), compare_config_from_json(doc.at("config")),
                       doc.at("threshold").get<double>(), {}, {}};
    for (const auto& c : doc.at("cells")) {
      cmp.cell_ids.push_back(c.at("cell_id").get<std::string>());
      cmp.records.push_back(record_from_json(c));
    }
    return cmp;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed cell comparison: ") + e.what());
  }
}

json deviation_map_to_json(const DeviationMap& dev) {
  return {{"kind", "deviation_map"},
          {"domain", to_json(dev.domain)},
          {"z", encode_values(dev.z)},
          {"flag", encode_bytes(dev.flag)}};
}

DeviationMap deviation_map_from_json(const json& doc) {
  expect_kind(doc, "deviation_map");
  try {
    return {domain_from_json(doc.at("domain")), decode_values(doc.at("z")),
            decode_bytes(doc.at("flag"))};
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed deviation map: ") + e.what());
  }
}

}  // namespace octlayers
