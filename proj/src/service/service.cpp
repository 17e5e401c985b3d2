#include "octlayers/service.hpp"

#include <algorithm>
#include <cmath>

#include "octlayers/dataset_io.hpp"
#include "octlayers/encoding.hpp"
#include "octlayers/grid_io.hpp"
#include "octlayers/measure.hpp"
#include "octlayers/regions.hpp"
#include "octlayers/stats_io.hpp"

namespace octlayers {

namespace fs = std::filesystem;
using nlohmann::json;

ApiError::ApiError(int status, std::string code, const std::string& message, json detail)
    : std::runtime_error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}

json ApiError::body() const { return {{"code", code_}, {"message", what()}, {"detail", detail_}}; }

ApiError ApiError::from(const Error& e) {
  int status = 400;
  std::string code(to_string(e.kind()));
  switch (e.kind()) {
    case ErrorKind::Range: status = 404; code = "out_of_range"; break;
    case ErrorKind::Capability: status = 422; break;
    case ErrorKind::InsufficientData: status = 422; break;
    case ErrorKind::Edit: status = 409; code = "illegal_edit"; break;
    case ErrorKind::Io: status = 500; break;
    default: break;
  }
  return ApiError(status, code, e.what(), e.details().empty() ? json(nullptr) : json(e.details()));
}

namespace {

ApiError not_found(const std::string& what) { return ApiError(404, "not_found", what + " not found"); }
ApiError bad_request(const std::string& msg) { return ApiError(400, "bad_request", msg); }

const std::vector<std::string> kAttributeNames = {"thickness", "curvature", "curvature_lower",
                                                  "reflectivity", "reflectivity_raw"};

std::string str_field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string())
    throw bad_request(std::string("missing string field '") + key + "'");
  return body[key].get<std::string>();
}

std::optional<std::string> opt_str(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_string()) throw bad_request(std::string("field '") + key + "' must be a string");
  return body[key].get<std::string>();
}

std::optional<double> opt_num(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_number()) throw bad_request(std::string("field '") + key + "' must be a number");
  return body[key].get<double>();
}

json value_range(const Raster<double>& values) {
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values.values())
    if (is_valid(v) && std::abs(v) < kInfiniteSentinel) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (lo > hi) return nullptr;
  return {{"min", lo}, {"max", hi}};
}

json record_list(const CellComparison& c) {
  json arr = json::array();
  for (std::size_t i = 0; i < c.cell_ids.size(); ++i) {
    json j = to_json(c.records[i]);
    j["cell_id"] = c.cell_ids[i];
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

struct ApiService::Impl {
  struct Entry {
    std::string cohort;
    Dataset dataset;
  };
  struct GridCompare {
    std::string patients, controls;
    CompareConfig config;
  };
  struct GridState {
    std::string id;
    std::uint64_t version = 1;
    json subject;
    AttributeKind kind;
    AdaptiveGrid grid;
    std::optional<GridCompare> compare;
  };
  struct Session {
    std::string id;
    mutable std::mutex mu;
    std::map<std::string, GridState> grids;
    int next_grid = 1;
    json selection;
  };

  std::vector<Entry> entries;  // sorted by id
  std::map<std::string, std::size_t> by_id;
  std::map<std::string, std::vector<std::size_t>> cohorts;

  mutable std::mutex cache_mu;
  mutable std::map<std::string, std::shared_ptr<const AttributeMap>> maps;
  mutable std::map<std::string, std::shared_ptr<const ControlModel>> models;
  std::map<std::string, std::string> compare_cache;

  mutable std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  int next_session = 1;

  const Entry& entry(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw not_found("dataset '" + id + "'");
    return entries[it->second];
  }

  const std::vector<std::size_t>& cohort(const std::string& name) const {
    auto it = cohorts.find(name);
    if (it == cohorts.end()) throw not_found("cohort '" + name + "'");
    return it->second;
  }

  std::shared_ptr<Session> session(const std::string& id) const {
    std::lock_guard lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw not_found("session '" + id + "'");
    return it->second;
  }

  static AttributeKind parse_kind(const std::string& a) { return AttributeKind::parse(a); }

  std::shared_ptr<const AttributeMap> attribute_map(const Entry& e, int layer,
                                                    const AttributeKind& kind) const {
    const std::string key = e.dataset.id + "|" + std::to_string(layer) + "|" + kind.name();
    {
      std::lock_guard lock(cache_mu);
      if (auto it = maps.find(key); it != maps.end()) return it->second;
    }
    auto m = std::make_shared<const AttributeMap>(compute_attribute_map(e.dataset, layer, kind));
    std::lock_guard lock(cache_mu);
    return maps.emplace(key, m).first->second;
  }

  std::vector<AttributeMap> cohort_maps(const std::string& name, const std::string& layer,
                                        const AttributeKind& kind) const {
    std::vector<AttributeMap> out;
    for (std::size_t i : cohort(name)) {
      const Entry& e = entries[i];
      out.push_back(*attribute_map(e, resolve_layer(e.dataset.segmentation, layer), kind));
    }
    return out;
  }

  std::shared_ptr<const ControlModel> control_model(const std::string& name, const std::string& layer,
                                                    const AttributeKind& kind) const {
    const std::string key = name + "|" + layer + "|" + kind.name();
    {
      std::lock_guard lock(cache_mu);
      if (auto it = models.find(key); it != models.end()) return it->second;
    }
    auto m = std::make_shared<const ControlModel>(build_control_model(cohort_maps(name, layer, kind)));
    std::lock_guard lock(cache_mu);
    return models.emplace(key, m).first->second;
  }

  json grid_payload(const GridState& g) const {
    json j = {{"grid_id", g.id},
              {"version", g.version},
              {"subject", g.subject},
              {"unit", g.kind.unit()},
              {"grid", grid_to_json(g.grid)}};
    if (g.compare) {
      const auto layer = g.subject.at("layer").get<std::string>();
      const auto pm = cohort_maps(g.compare->patients, layer, g.kind);
      const auto cm = cohort_maps(g.compare->controls, layer, g.kind);
      const CellComparison c = compare_gridwise(g.grid, pm, cm, g.compare->config);
      j["comparison"] = {{"patients", g.compare->patients},
                         {"controls", g.compare->controls},
                         {"config", to_json(c.config)},
                         {"threshold", c.threshold},
                         {"cells", record_list(c)}};
    }
    return j;
  }
};

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ApiError&) {
    throw;
  } catch (const Error& e) {
    throw ApiError::from(e);
  } catch (const json::exception& e) {
    throw bad_request(std::string("malformed request: ") + e.what());
  }
}

ApiService::ApiService(const fs::path& root) : impl_(std::make_unique<Impl>()) {
  guarded([&] {
    std::vector<std::pair<std::string, fs::path>> found;
    if (fs::is_directory(root)) {
      std::vector<fs::path> subdirs;
      for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) subdirs.push_back(e.path());
      std::sort(subdirs.begin(), subdirs.end());
      for (const auto& d : subdirs) {
        if (is_dataset_dir(d)) {
          found.emplace_back("", d);
          continue;
        }
        std::vector<fs::path> inner;
        for (const auto& e : fs::directory_iterator(d))
          if (e.is_directory() && is_dataset_dir(e.path())) inner.push_back(e.path());
        std::sort(inner.begin(), inner.end());
        for (const auto& p : inner) found.emplace_back(d.filename().string(), p);
      }
    } else {
      fail(ErrorKind::Io, "data root not found: " + root.string());
    }
    for (const auto& [cohort, dir] : found) impl_->entries.push_back({cohort, load_dataset(dir)});
    std::sort(impl_->entries.begin(), impl_->entries.end(),
              [](const auto& a, const auto& b) { return a.dataset.id < b.dataset.id; });
    for (std::size_t i = 0; i < impl_->entries.size(); ++i) {
      const auto& e = impl_->entries[i];
      if (!impl_->by_id.emplace(e.dataset.id, i).second)
        fail(ErrorKind::Validation, "duplicate dataset id '" + e.dataset.id + "'");
      if (!e.cohort.empty()) impl_->cohorts[e.cohort].push_back(i);
    }
    return 0;
  });
}

ApiService::~ApiService() = default;

json ApiService::catalog() const {
  json datasets = json::array();
  for (const auto& e : impl_->entries) {
    const auto& g = e.dataset.geometry;
    json attrs = json::array();
    for (const auto& a : kAttributeNames)
      if (e.dataset.volume || a.rfind("reflectivity", 0) != 0) attrs.push_back(a);
    datasets.push_back({{"id", e.dataset.id},
                        {"cohort", e.cohort.empty() ? json(nullptr) : json(e.cohort)},
                        {"eye", std::string(to_string(g.eye))},
                        {"width", g.width},
                        {"n_bscans", g.n_bscans},
                        {"layers", e.dataset.segmentation.layer_names},
                        {"attributes", attrs},
                        {"has_volume", e.dataset.volume.has_value()}});
  }
  json cohorts = json::array();
  for (const auto& [name, idx] : impl_->cohorts) {
    json ids = json::array();
    for (auto i : idx) ids.push_back(impl_->entries[i].dataset.id);
    cohorts.push_back({{"name", name}, {"datasets", ids}});
  }
  return {{"datasets", datasets},
          {"cohorts", cohorts},
          {"attributes", kAttributeNames},
          {"comparisons",
           {{"modes", {"map", "grid", "both"}},
            {"tests", {"welch_t", "mann_whitney_u"}},
            {"corrections", {"none", "bonferroni", "bh"}}}}};
}

json ApiService::dataset(const std::string& id) const {
  return guarded([&] {
    const auto& e = impl_->entry(id);
    const auto& g = e.dataset.geometry;
    return json{{"id", e.dataset.id},
                {"cohort", e.cohort.empty() ? json(nullptr) : json(e.cohort)},
                {"group_label", e.dataset.group_label ? json(*e.dataset.group_label) : json(nullptr)},
                {"geometry",
                 {{"eye", std::string(to_string(g.eye))},
                  {"width", g.width},
                  {"n_bscans", g.n_bscans},
                  {"bscan_height", g.bscan_height},
                  {"res_axial_um", g.res_axial_um},
                  {"res_lateral_um", g.res_lateral_um},
                  {"res_bscan_um", g.res_bscan_um},
                  {"fovea_ix", g.fovea_ix},
                  {"fovea_iy", g.fovea_iy}}},
                {"layers", e.dataset.segmentation.layer_names},
                {"boundary_coverage", boundary_coverage(e.dataset.segmentation)},
                {"has_volume", e.dataset.volume.has_value()},
                {"warnings", e.dataset.warnings}};
  });
}

json ApiService::map(const std::string& id, const std::string& layer, const std::string& attribute,
                     const std::optional<std::string>& deviation) const {
  return guarded([&] {
    const auto& e = impl_->entry(id);
    const AttributeKind kind = Impl::parse_kind(attribute);
    const int l = resolve_layer(e.dataset.segmentation, layer);
    const auto m = impl_->attribute_map(e, l, kind);
    const auto& names = e.dataset.segmentation.layer_names;
    if (deviation) {
      const auto model = impl_->control_model(*deviation, layer, kind);
      const DeviationMap dev = deviation_map(*m, *model);
      json j = deviation_map_to_json(dev);
      j["dataset"] = id;
      j["layer_id"] = l;
      j["layer_name"] = names[static_cast<std::size_t>(l)];
      j["attribute"] = kind.name();
      j["model"] = *deviation;
      j["unit"] = "z";
      j["shape"] = {m->domain.n_bscans, m->domain.width};
      j["range"] = value_range(dev.z);
      j["interval_percentiles"] = {model->percentile_lo, model->percentile_hi};
      return j;
    }
    json j = attribute_map_to_json(*m);
    j["dataset"] = id;
    j["layer_name"] = names[static_cast<std::size_t>(l)];
    j["shape"] = {m->domain.n_bscans, m->domain.width};
    j["range"] = value_range(m->values);
    return j;
  });
}

json ApiService::bscan(const std::string& id, int iy, const std::optional<std::string>& layer,
                       const std::optional<std::string>& attribute) const {
  return guarded([&] {
    const auto& e = impl_->entry(id);
    const auto& g = e.dataset.geometry;
    if (iy < 0 || iy >= g.n_bscans)
      fail(ErrorKind::Range, "B-scan " + std::to_string(iy) + " out of range [0, " +
                                 std::to_string(g.n_bscans) + ")");
    json boundaries = json::array();
    for (const auto& b : e.dataset.segmentation.boundaries) {
      json row = json::array();
      for (int ix = 0; ix < g.width; ++ix) row.push_back(number_or_null(b(ix, iy)));
      boundaries.push_back(std::move(row));
    }
    json j = {{"dataset", id},
              {"iy", iy},
              {"width", g.width},
              {"bscan_height", g.bscan_height},
              {"res_axial_um", g.res_axial_um},
              {"layer_names", e.dataset.segmentation.layer_names},
              {"boundaries", boundaries}};
    if (e.dataset.volume) {
      Raster<std::uint8_t> img(g.width, g.bscan_height, 0);
      for (int r = 0; r < g.bscan_height; ++r)
        for (int ix = 0; ix < g.width; ++ix) img(ix, r) = e.dataset.volume->at(ix, r, iy);
      j["intensity"] = encode_bytes(img);
    } else {
      j["intensity"] = nullptr;
    }
    if (layer.has_value() != attribute.has_value())
      throw bad_request("layer and attribute must be given together");
    if (layer) {
      const AttributeKind kind = Impl::parse_kind(*attribute);
      const int l = resolve_layer(e.dataset.segmentation, *layer);
      const auto m = impl_->attribute_map(e, l, kind);
      json values = json::array();
      for (const auto& p : attribute_profile(*m, iy))
        values.push_back(p.value ? json(*p.value) : json(nullptr));
      j["profile"] = {{"layer_id", l}, {"attribute", kind.name()}, {"unit", m->unit}, {"values", values}};
    } else {
      j["profile"] = nullptr;
    }
    return j;
  });
}

json ApiService::create_session() {
  std::lock_guard lock(impl_->sessions_mu);
  auto s = std::make_shared<Impl::Session>();
  s->id = "s" + std::to_string(impl_->next_session++);
  impl_->sessions.emplace(s->id, s);
  return {{"session_id", s->id}};
}

json ApiService::list_grids(const std::string& session) const {
  return guarded([&] {
    const auto s = impl_->session(session);
    std::lock_guard lock(s->mu);
    json arr = json::array();
    for (const auto& [id, g] : s->grids)
      arr.push_back({{"grid_id", id}, {"version", g.version}, {"subject", g.subject},
                     {"leaf_count", g.grid.leaf_count()}});
    return json{{"session_id", session}, {"grids", arr}};
  });
}

json ApiService::create_grid(const std::string& session, const json& body) {
  return guarded([&] {
    const auto s = impl_->session(session);
    if (!body.is_object()) throw bad_request("body must be an object");
    const std::string layer = str_field(body, "layer");
    const AttributeKind kind = Impl::parse_kind(str_field(body, "attribute"));
    const auto dataset = opt_str(body, "dataset");
    const auto cohort = opt_str(body, "cohort");
    if (dataset.has_value() == cohort.has_value())
      throw bad_request("give exactly one of 'dataset' or 'cohort'");
    const auto sd = opt_num(body, "sd_threshold");
    const int max_depth = static_cast<int>(opt_num(body, "max_depth").value_or(3));
    const auto min_points =
        static_cast<std::size_t>(opt_num(body, "min_points").value_or(kDefaultMinPoints));

    Impl::GridState g;
    g.kind = kind;
    g.subject = {{"layer", layer}, {"attribute", kind.name()}};
    if (dataset) {
      const auto& e = impl_->entry(*dataset);
      const auto m = impl_->attribute_map(e, resolve_layer(e.dataset.segmentation, layer), kind);
      g.subject["dataset"] = *dataset;
      g.grid = sd ? fit_grid(*m, *sd, max_depth, min_points)
                  : etdrs_base_grid({{1.0, 3.0, 6.0}, m->domain.eye},
                                    std::make_shared<SummarySource>(SummarySource{*m, {}, {}}));
    } else {
      auto maps = impl_->cohort_maps(*cohort, layer, kind);
      g.subject["cohort"] = *cohort;
      if (sd) {
        g.grid = fit_common_grid(maps, *sd, max_depth, min_points);
      } else {
        if (maps.empty()) fail(ErrorKind::InsufficientData, "cohort is empty");
        const Eye eye = maps.front().domain.eye;
        AttributeMap mean = group_mean_map(maps);
        g.grid = etdrs_base_grid({{1.0, 3.0, 6.0}, eye},
                                 std::make_shared<SummarySource>(SummarySource{std::move(mean), std::move(maps), {}}));
      }
    }
    if (body.contains("compare") && !body["compare"].is_null()) {
      const json& c = body["compare"];
      json cfg = c;
      if (!cfg.contains("correction")) cfg["correction"] = "none";
      g.compare = Impl::GridCompare{str_field(c, "patients"), str_field(c, "controls"),
                                    compare_config_from_json(cfg)};
      impl_->cohort(g.compare->patients);
      impl_->cohort(g.compare->controls);
    }
    std::lock_guard lock(s->mu);
    g.id = "g" + std::to_string(s->next_grid++);
    const auto& stored = s->grids.emplace(g.id, std::move(g)).first->second;
    return impl_->grid_payload(stored);
  });
}

json ApiService::get_grid(const std::string& session, const std::string& grid) const {
  return guarded([&] {
    const auto s = impl_->session(session);
    std::lock_guard lock(s->mu);
    auto it = s->grids.find(grid);
    if (it == s->grids.end()) throw not_found("grid '" + grid + "'");
    return impl_->grid_payload(it->second);
  });
}

json ApiService::edit_grid(const std::string& session, const std::string& grid,
                           const std::string& cell, const std::string& op, const json& body) {
  return guarded([&] {
    const auto s = impl_->session(session);
    if (op != "split" && op != "merge") throw bad_request("unknown edit '" + op + "'");
    if (!body.is_object() || !body.contains("version") || !body["version"].is_number_integer() ||
        body["version"].get<std::int64_t>() < 0)
      throw bad_request("edit requests need an integer 'version'");
    const auto version = body["version"].get<std::uint64_t>();
    std::lock_guard lock(s->mu);
    auto it = s->grids.find(grid);
    if (it == s->grids.end()) throw not_found("grid '" + grid + "'");
    auto& g = it->second;
    if (version != g.version)
      throw ApiError(409, "version_conflict",
                     "grid was modified (version " + std::to_string(g.version) + ")",
                     {{"current_version", g.version}});
    if (!g.grid.contains(cell)) throw not_found("cell '" + cell + "'");
    AdaptiveGrid next = op == "split" ? split_cell(g.grid, cell) : merge_children(g.grid, cell);
    next.check_invariants();
    g.grid = std::move(next);
    ++g.version;
    return impl_->grid_payload(g);
  });
}

std::string ApiService::compare(const json& body) {
  return guarded([&] {
    if (!body.is_object()) throw bad_request("body must be an object");
    const std::string patients = str_field(body, "patients");
    const std::string controls = str_field(body, "controls");
    const std::string layer = str_field(body, "layer");
    const AttributeKind kind = Impl::parse_kind(str_field(body, "attribute"));
    const std::string mode = opt_str(body, "mode").value_or("map");
    if (mode != "map" && mode != "grid" && mode != "both") throw bad_request("unknown mode '" + mode + "'");
    json cfg_in = body;
    const bool grid_only = mode == "grid";
    if (!body.contains("correction")) cfg_in["correction"] = grid_only ? "none" : "bh";
    const CompareConfig cfg = compare_config_from_json(cfg_in);
    const double sd = opt_num(body, "sd_threshold").value_or(5.0);
    const int max_depth = static_cast<int>(opt_num(body, "max_depth").value_or(3));
    json grid_cfg_in = cfg_in;
    if (!body.contains("correction")) grid_cfg_in["correction"] = "none";
    const CompareConfig grid_cfg = compare_config_from_json(grid_cfg_in);

    json request = {{"patients", patients}, {"controls", controls}, {"layer", layer},
                    {"attribute", kind.name()}, {"mode", mode}};
    if (mode != "grid") request["map_config"] = to_json(cfg);
    if (mode != "map") {
      request["grid_config"] = to_json(grid_cfg);
      request["sd_threshold"] = sd;
      request["max_depth"] = max_depth;
    }
    const std::string key = request.dump();
    {
      std::lock_guard lock(impl_->cache_mu);
      if (auto it = impl_->compare_cache.find(key); it != impl_->compare_cache.end()) return it->second;
    }
    const auto pm = impl_->cohort_maps(patients, layer, kind);
    const auto cm = impl_->cohort_maps(controls, layer, kind);
    check_groups(pm, cm, cfg.min_samples);
    json out = {{"kind", "comparison"}, {"request", request}, {"unit", kind.unit()}};
    if (mode != "grid") {
      const ComparisonMap cmp = compare_pointwise(pm, cm, cfg);
      const auto regions = extract_significant_regions(cmp);
      json rj = json::array();
      double area = 0.0;
      for (const auto& r : regions) {
        rj.push_back(to_json(r));
        area += r.area_mm2;
      }
      json mj = comparison_map_to_json(cmp);
      Raster<double> diff(cmp.domain.width, cmp.domain.n_bscans, invalid_value<double>());
      for (int iy = 0; iy < diff.height(); ++iy)
        for (int ix = 0; ix < diff.width(); ++ix)
          if (cmp.at(ix, iy).tested) diff(ix, iy) = cmp.at(ix, iy).diff;
      mj["range"] = value_range(diff);
      out["map"] = std::move(mj);
      out["regions"] = std::move(rj);
      out["significant_area_mm2"] = area;
    }
    if (mode != "map") {
      const AdaptiveGrid grid = fit_common_grid(cm, sd, max_depth);
      out["grid"] = cell_comparison_to_json(compare_gridwise(grid, pm, cm, grid_cfg));
    }
    std::string bytes = out.dump();
    std::lock_guard lock(impl_->cache_mu);
    return impl_->compare_cache.emplace(key, std::move(bytes)).first->second;
  });
}

json ApiService::measure(const std::string& session, const json& body) {
  return guarded([&] {
    const auto s = impl_->session(session);
    if (!body.is_object()) throw bad_request("body must be an object");
    const std::string layer = str_field(body, "layer");
    const AttributeKind kind = Impl::parse_kind(str_field(body, "attribute"));
    if (!body.contains("selection") || !body["selection"].is_object())
      throw bad_request("missing 'selection'");
    const json& sel = body["selection"];
    const auto dataset = opt_str(body, "dataset");
    const auto patients = opt_str(body, "patients");
    const auto controls = opt_str(body, "controls");
    if (dataset.has_value() == (patients.has_value() || controls.has_value()))
      throw bad_request("give either 'dataset' or 'patients' and 'controls'");
    if (!dataset && !(patients && controls)) throw bad_request("give both 'patients' and 'controls'");

    std::shared_ptr<const AttributeMap> single;
    std::vector<AttributeMap> pm, cm;
    if (dataset) {
      const auto& e = impl_->entry(*dataset);
      single = impl_->attribute_map(e, resolve_layer(e.dataset.segmentation, layer), kind);
    } else {
      pm = impl_->cohort_maps(*patients, layer, kind);
      cm = impl_->cohort_maps(*controls, layer, kind);
      check_groups(pm, cm, 3);
    }
    const EnFaceDomain& domain = single ? single->domain : pm.front().domain;

    Mask mask;
    if (sel.contains("cells")) {
      const std::string grid = str_field(sel, "grid");
      std::vector<std::string> ids = sel.at("cells").get<std::vector<std::string>>();
      if (ids.empty()) fail(ErrorKind::Selection, "selection is empty");
      std::lock_guard lock(s->mu);
      auto it = s->grids.find(grid);
      if (it == s->grids.end()) throw not_found("grid '" + grid + "'");
      for (const auto& id : ids)
        if (!it->second.grid.contains(id)) throw not_found("cell '" + id + "'");
      mask = mask_from_cells(domain, it->second.grid, ids);
    } else if (sel.contains("polygon")) {
      Polygon poly;
      for (const auto& p : sel.at("polygon")) {
        if (!p.is_array() || p.size() != 2) throw bad_request("polygon vertices are [x_mm, y_mm]");
        poly.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      if (poly.size() < 3) fail(ErrorKind::Selection, "polygon needs at least 3 vertices");
      mask = mask_from_polygon(domain, poly);
    } else {
      throw bad_request("selection needs 'cells' or 'polygon'");
    }

    MeasurementSummary m;
    if (single) {
      std::shared_ptr<const ControlModel> model;
      if (auto dev = opt_str(body, "deviation")) model = impl_->control_model(*dev, layer, kind);
      m = measure_region(*single, mask, model.get());
    } else {
      json cfg_in = body.value("config", json::object());
      if (!cfg_in.contains("correction")) cfg_in["correction"] = "none";
      m = measure_region(pm, cm, mask, compare_config_from_json(cfg_in));
    }
    {
      std::lock_guard lock(s->mu);
      s->selection = sel;
    }
    json j = to_json(m);
    j["unit"] = kind.unit();
    j["selection"] = sel;
    return j;
  });
}

std::size_t ApiService::compare_cache_size() const {
  std::lock_guard lock(impl_->cache_mu);
  return impl_->compare_cache.size();
}

}  // namespace octlayers
