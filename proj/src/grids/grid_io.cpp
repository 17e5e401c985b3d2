#include "octlayers/grid_io.hpp"

#include "grid_access.hpp"
#include "octlayers/encoding.hpp"
#include "octlayers/error.hpp"

namespace octlayers {

using detail::GridAccess;
using nlohmann::json;

namespace {

Quadrant quadrant_from(const std::string& s) {
  for (auto q : {Quadrant::Nasal, Quadrant::Superior, Quadrant::Temporal, Quadrant::Inferior})
    if (to_string(q) == s) return q;
  fail(ErrorKind::Format, "unknown quadrant '" + s + "'");
}

json cell_tree(const AdaptiveGrid& g, const GridCell& c) {
  json j = {{"id", c.id},
            {"r_inner_mm", c.r_inner},
            {"r_outer_mm", c.r_outer},
            {"theta_start", c.theta_start},
            {"theta_end", c.theta_end},
            {"depth", c.depth},
            {"quadrant", std::string(to_string(c.quadrant))},
            {"leaf", c.is_leaf()},
            {"area_mm2", c.area_mm2()}};
  j["summary"] = c.summary ? to_json(*c.summary) : json(nullptr);
  json children = json::array();
  for (const auto& id : c.children) children.push_back(cell_tree(g, g.cell(id)));
  j["children"] = std::move(children);
  return j;
}

void read_cell(AdaptiveGrid& g, const json& j) {
  GridCell c;
  c.id = j.at("id").get<std::string>();
  c.r_inner = j.at("r_inner_mm").get<double>();
  c.r_outer = j.at("r_outer_mm").get<double>();
  c.theta_start = j.at("theta_start").get<double>();
  c.theta_end = j.at("theta_end").get<double>();
  c.depth = j.at("depth").get<int>();
  c.quadrant = quadrant_from(j.at("quadrant").get<std::string>());
  if (j.contains("summary") && !j["summary"].is_null()) c.summary = summary_from_json(j["summary"]);
  for (const auto& ch : j.at("children")) {
    c.children.push_back(ch.at("id").get<std::string>());
    read_cell(g, ch);
  }
  GridAccess::cells(g).emplace(c.id, std::move(c));
}

}  // namespace

json to_json(const CellSummary& s) {
  json j = {{"n_valid", s.n_valid},   {"n_total", s.n_total},           {"mean", s.mean},
            {"sd", s.sd},             {"min", s.min},                   {"max", s.max},
            {"coverage", s.coverage}, {"reliable", s.reliable}};
  if (s.between_subject_sd) {
    j["between_subject_sd"] = *s.between_subject_sd;
    j["n_subjects"] = s.n_subjects;
  }
  return j;
}

CellSummary summary_from_json(const json& j) {
  CellSummary s;
  s.n_valid = j.at("n_valid").get<std::size_t>();
  s.n_total = j.at("n_total").get<std::size_t>();
  s.mean = j.at("mean").get<double>();
  s.sd = j.at("sd").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.coverage = j.at("coverage").get<double>();
  s.reliable = j.at("reliable").get<bool>();
  if (j.contains("between_subject_sd")) {
    s.between_subject_sd = j["between_subject_sd"].get<double>();
    s.n_subjects = j.value("n_subjects", std::size_t{0});
  }
  return s;
}

json grid_to_json(const AdaptiveGrid& g) {
  json tree = json::array();
  for (const auto& id : g.roots()) tree.push_back(cell_tree(g, g.cell(id)));
  json prov = {{"edits", g.provenance().edits}};
  const auto& p = g.provenance();
  prov["sd_threshold"] = p.sd_threshold ? json(*p.sd_threshold) : json(nullptr);
  prov["max_depth"] = p.max_depth ? json(*p.max_depth) : json(nullptr);
  prov["min_points"] = p.min_points ? json(*p.min_points) : json(nullptr);
  return {{"kind", "adaptive_grid"},
          {"layout",
           {{"diameters_mm", g.layout().diameters_mm},
            {"eye", std::string(to_string(g.layout().eye))}}},
          {"leaf_count", g.leaf_count()},
          {"leaves", g.leaf_ids()},
          {"cells", std::move(tree)},
          {"provenance", std::move(prov)}};
}

AdaptiveGrid grid_from_json(const json& doc) {
  try {
    AdaptiveGrid g;
    auto& layout = GridAccess::layout(g);
    layout.diameters_mm = doc.at("layout").at("diameters_mm").get<std::array<double, 3>>();
    layout.eye = parse_eye(doc.at("layout").at("eye").get<std::string>());
    for (const auto& root : doc.at("cells")) {
      GridAccess::roots(g).push_back(root.at("id").get<std::string>());
      read_cell(g, root);
    }
    const auto& prov = doc.at("provenance");
    auto& p = GridAccess::provenance(g);
    p.edits = prov.at("edits").get<std::vector<std::string>>();
    auto present = [&](const char* key) { return prov.contains(key) && !prov.at(key).is_null(); };
    if (present("sd_threshold")) p.sd_threshold = prov.at("sd_threshold").get<double>();
    if (present("max_depth")) p.max_depth = prov.at("max_depth").get<int>();
    if (present("min_points")) p.min_points = prov.at("min_points").get<std::size_t>();
    try {
      g.check_invariants();
    } catch (const Error& e) {
      fail(ErrorKind::Format, std::string("grid document: ") + e.what(), e.details());
    }
    return g;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed grid document: ") + e.what());
  }
}

}  // namespace octlayers
