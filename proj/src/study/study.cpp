#include "octlayers/study.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>

#include "octlayers/dataset_io.hpp"
#include "octlayers/error.hpp"
#include "octlayers/grid_io.hpp"
#include "octlayers/stats_io.hpp"

namespace octlayers {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(StudyMode m) {
  switch (m) {
    case StudyMode::Map: return "map";
    case StudyMode::Grid: return "grid";
    case StudyMode::Both: return "both";
  }
  return "both";
}

StudyMode parse_study_mode(std::string_view text) {
  if (text == "map") return StudyMode::Map;
  if (text == "grid") return StudyMode::Grid;
  if (text == "both") return StudyMode::Both;
  fail(ErrorKind::Validation, "unknown mode '" + std::string(text) + "'");
}

void StudyConfig::validate() const {
  std::vector<std::string> errs;
  if (!fs::is_directory(patients)) errs.push_back("patient directory not found: " + patients.string());
  if (!fs::is_directory(controls)) errs.push_back("control directory not found: " + controls.string());
  if (layers.empty()) errs.push_back("at least one layer is required");
  if (attributes.empty()) errs.push_back("at least one attribute is required");
  if (!(alpha > 0.0 && alpha < 1.0)) errs.push_back("alpha must be in (0, 1)");
  if (!(sd_threshold > 0.0)) errs.push_back("sd_threshold must be > 0");
  if (max_depth < 0 || max_depth > AdaptiveGrid::kHardMaxDepth)
    errs.push_back("max_depth must be in [0, " + std::to_string(AdaptiveGrid::kHardMaxDepth) + "]");
  if (render.range && !(render.range->first < render.range->second))
    errs.push_back("range must satisfy lo < hi");
  if (!errs.empty()) fail(ErrorKind::Validation, errs.front(), errs);
}

CompareConfig StudyConfig::map_compare() const {
  return {test, alpha, correction.value_or(Correction::BenjaminiHochberg), 3};
}

CompareConfig StudyConfig::grid_compare() const {
  return {test, alpha, correction.value_or(Correction::None), 3};
}

json to_json(const StudyConfig& c) {
  json attrs = json::array();
  for (const auto& a : c.attributes) attrs.push_back(a.name());
  json j = {{"layers", c.layers},
            {"attributes", attrs},
            {"mode", std::string(to_string(c.mode))},
            {"test", std::string(to_string(c.test))},
            {"alpha", c.alpha},
            {"correction", c.correction ? json(std::string(to_string(*c.correction))) : json(nullptr)},
            {"map_correction", std::string(to_string(c.map_compare().correction))},
            {"grid_correction", std::string(to_string(c.grid_compare().correction))},
            {"sd_threshold", c.sd_threshold},
            {"max_depth", c.max_depth},
            {"seed", c.seed},
            {"palette", std::string(to_string(c.render.palette))}};
  j["range"] = c.render.range ? json{c.render.range->first, c.render.range->second} : json(nullptr);
  return j;
}

std::vector<CohortEntry> load_cohort(const fs::path& dir) {
  std::vector<fs::path> dirs;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_directory() && is_dataset_dir(e.path())) dirs.push_back(e.path());
  if (ec) fail(ErrorKind::Io, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(dirs.begin(), dirs.end());
  std::vector<std::future<Dataset>> jobs;
  for (const auto& d : dirs) jobs.push_back(std::async(std::launch::async, [d] { return load_dataset(d); }));
  std::vector<CohortEntry> out;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out.push_back({dirs[i].filename().string(), jobs[i].get()});
    } catch (const Error& e) {
      errors.push_back(dirs[i].filename().string() + ": " + e.what());
    }
  }
  if (!errors.empty()) fail(ErrorKind::Validation, errors.front(), errors);
  return out;
}

double StudyTaskResult::significant_area_mm2() const {
  double a = 0.0;
  for (const auto& r : regions) a += r.area_mm2;
  return a;
}

namespace {

std::vector<AttributeMap> maps_for(const std::vector<CohortEntry>& cohort, int layer,
                                   const AttributeKind& kind) {
  std::vector<std::future<AttributeMap>> jobs;
  for (const auto& e : cohort)
    jobs.push_back(std::async(std::launch::async,
                              [&e, layer, kind] { return compute_attribute_map(e.dataset, layer, kind); }));
  std::vector<AttributeMap> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

StudyTaskResult run_task(const StudyConfig& cfg, const std::vector<CohortEntry>& patients,
                         const std::vector<CohortEntry>& controls, int layer, const AttributeKind& kind) {
  StudyTaskResult t;
  t.layer_id = layer;
  t.layer_name = patients.front().dataset.segmentation.layer_names.at(static_cast<std::size_t>(layer));
  t.kind = kind;
  const auto pm = maps_for(patients, layer, kind);
  const auto cm = maps_for(controls, layer, kind);
  check_groups(pm, cm, 3);
  if (cfg.mode != StudyMode::Map) {
    const AdaptiveGrid grid = fit_common_grid(cm, cfg.sd_threshold, cfg.max_depth);
    t.cells = compare_gridwise(grid, pm, cm, cfg.grid_compare());
  }
  if (cfg.mode != StudyMode::Grid) {
    t.map = compare_pointwise(pm, cm, cfg.map_compare());
    t.regions = extract_significant_regions(*t.map);
    for (const auto& r : t.regions)
      t.region_measures.push_back(
          measure_region(pm, cm, region_mask(t.map->domain, r), cfg.map_compare()));
  }
  return t;
}

json dataset_entries(const std::vector<CohortEntry>& cohort) {
  json arr = json::array();
  for (const auto& e : cohort)
    arr.push_back({{"dir", e.dir}, {"id", e.dataset.id}, {"warnings", e.dataset.warnings}});
  return arr;
}

std::string task_stem(const StudyTaskResult& t) {
  std::string a = t.kind.name();
  std::replace(a.begin(), a.end(), ':', '-');
  return t.layer_name + "_" + a;
}

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string record_fields(const ComparisonRecord& r) {
  std::string s = std::to_string(r.n_p) + "," + std::to_string(r.n_c) + ",";
  if (r.tested)
    s += num(r.mean_p) + "," + num(r.mean_c) + "," + num(r.diff) + "," + num(r.p) + "," + num(r.d);
  else
    s += ",,,,";
  return s + "," + (r.significant ? "1" : "0");
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorKind::Io, "write failed for " + p.string());
}

}  // namespace

StudyReport evaluate_study(const StudyConfig& cfg, const std::vector<CohortEntry>& patients,
                           const std::vector<CohortEntry>& controls) {
  if (patients.size() < 3 || controls.size() < 3)
    fail(ErrorKind::InsufficientData, "each group needs at least 3 datasets (patients " +
                                          std::to_string(patients.size()) + ", controls " +
                                          std::to_string(controls.size()) + ")");
  const Segmentation& seg = patients.front().dataset.segmentation;
  std::vector<int> layer_ids;
  for (const auto& sel : cfg.layers) {
    try {
      layer_ids.push_back(resolve_layer(seg, sel));
    } catch (const Error& e) {
      fail(ErrorKind::Validation, e.what());
    }
  }
  std::vector<std::future<StudyTaskResult>> jobs;
  for (int layer : layer_ids)
    for (const auto& kind : cfg.attributes)
      jobs.push_back(std::async(std::launch::async, [&, layer, kind] {
        return run_task(cfg, patients, controls, layer, kind);
      }));
  StudyReport rep;
  for (auto& j : jobs) rep.tasks.push_back(j.get());

  json tasks = json::array();
  for (const auto& t : rep.tasks) {
    json jt = {{"layer", t.layer_name}, {"layer_id", t.layer_id}, {"attribute", t.kind.name()},
               {"stem", task_stem(t)}};
    if (t.cells) {
      std::size_t tested = 0, sig = 0;
      for (const auto& r : t.cells->records) {
        tested += r.tested;
        sig += r.significant;
      }
      jt["grid"] = {{"leaf_count", t.cells->cell_ids.size()},
                    {"tested_cells", tested},
                    {"significant_cells", sig},
                    {"threshold", t.cells->threshold}};
    }
    if (t.map)
      jt["map"] = {{"tested_points", t.map->tested_count},
                   {"significant_points", t.map->significant_count},
                   {"regions", t.regions.size()},
                   {"significant_area_mm2", t.significant_area_mm2()},
                   {"threshold", t.map->threshold}};
    tasks.push_back(std::move(jt));
  }
  rep.manifest = {{"kind", "study_manifest"},
                  {"csv_schema", kCsvSchemaVersion},
                  {"config", to_json(cfg)},
                  {"datasets", {{"patients", dataset_entries(patients)},
                                {"controls", dataset_entries(controls)}}},
                  {"tasks", std::move(tasks)}};
  return rep;
}

std::string cells_csv(const StudyReport& report) {
  std::string s = "layer,attribute,cell_id,n_p,n_c,mean_p,mean_c,diff,p,d,significant\n";
  for (const auto& t : report.tasks) {
    if (!t.cells) continue;
    for (std::size_t i = 0; i < t.cells->cell_ids.size(); ++i)
      s += t.layer_name + "," + t.kind.name() + "," + t.cells->cell_ids[i] + "," +
           record_fields(t.cells->records[i]) + "\n";
  }
  return s;
}

std::string regions_csv(const StudyReport& report) {
  std::string s =
      "layer,attribute,region_id,n_p,n_c,mean_p,mean_c,diff,p,d,significant,n_points,area_mm2\n";
  for (const auto& t : report.tasks) {
    for (std::size_t i = 0; i < t.regions.size(); ++i) {
      const auto& m = t.region_measures[i];
      ComparisonRecord r;
      r.n_p = m.n_p.value_or(0);
      r.n_c = m.n_c.value_or(0);
      r.tested = m.p.has_value();
      r.mean_p = m.mean_p.value_or(0.0);
      r.mean_c = m.mean_c.value_or(0.0);
      r.diff = m.mean_diff.value_or(0.0);
      r.p = m.p.value_or(1.0);
      r.d = m.effect_size.value_or(0.0);
      r.significant = true;  // made of significant points
      s += t.layer_name + "," + t.kind.name() + "," + std::to_string(t.regions[i].id) + "," +
           record_fields(r) + "," + std::to_string(t.regions[i].points.size()) + "," +
           num(t.regions[i].area_mm2) + "\n";
    }
  }
  return s;
}

StudyReport run_study(const StudyConfig& cfg) {
  cfg.validate();
  auto pf = std::async(std::launch::async, [&] { return load_cohort(cfg.patients); });
  auto cf = std::async(std::launch::async, [&] { return load_cohort(cfg.controls); });
  const auto patients = pf.get();
  const auto controls = cf.get();
  StudyReport rep = evaluate_study(cfg, patients, controls);

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + cfg.out.string() + ": " + ec.message());
  write_file(cfg.out / "cells.csv", cells_csv(rep));
  write_file(cfg.out / "regions.csv", regions_csv(rep));
  for (std::size_t i = 0; i < rep.tasks.size(); ++i) {
    const auto& t = rep.tasks[i];
    const std::string stem = task_stem(t);
    json files = json::array();
    auto emit = [&](const std::string& name, const std::string& bytes) {
      write_file(cfg.out / name, bytes);
      files.push_back(name);
    };
    RenderOptions ro = cfg.render;
    ro.palette = Palette::Diverging;
    if (t.cells) {
      const json doc = cell_comparison_to_json(*t.cells);
      emit(stem + ".cells.json", doc.dump(1) + "\n");
      emit(stem + ".cells.ppm", encode_ppm(render_artifact(doc, ro)));
    }
    if (t.map) {
      const json doc = comparison_map_to_json(*t.map);
      emit(stem + ".map.json", doc.dump(1) + "\n");
      emit(stem + ".map.ppm", encode_ppm(render_artifact(doc, ro)));
      json regions = json::array();
      for (std::size_t k = 0; k < t.regions.size(); ++k) {
        json r = to_json(t.regions[k]);
        r["measurement"] = to_json(t.region_measures[k]);
        regions.push_back(std::move(r));
      }
      emit(stem + ".regions.json", json{{"kind", "region_list"}, {"regions", regions}}.dump(1) + "\n");
    }
    rep.manifest["tasks"][i]["files"] = std::move(files);
  }
  write_file(cfg.out / "manifest.json", rep.manifest.dump(2) + "\n");
  return rep;
}

}  // namespace octlayers
