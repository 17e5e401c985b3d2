// study: batch evaluation of patient vs control cohorts.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "octlayers/dataset_io.hpp"
#include "octlayers/error.hpp"
#include "octlayers/render.hpp"
#include "octlayers/study.hpp"
#include "octlayers/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace octlayers;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientData: return 3;
    case ErrorKind::Io: return 4;
    default: return 2;
  }
}

int report(const Error& e) {
  json j = {{"code", std::string(to_string(e.kind()))}, {"message", e.what()}, {"details", e.details()}};
  std::cerr << json{{"errors", json::array({j})}}.dump(2) << "\n";
  return exit_code(e.kind());
}

std::vector<std::string> split_list(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) {
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto pos = s.find(',', start);
      const auto item = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      if (!item.empty()) out.push_back(item);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
  return out;
}

std::optional<std::pair<double, double>> parse_range(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto pos = text.find(',');
  try {
    if (pos == std::string::npos) throw std::invalid_argument(text);
    std::size_t n1 = 0, n2 = 0;
    const double lo = std::stod(text.substr(0, pos), &n1);
    const double hi = std::stod(text.substr(pos + 1), &n2);
    if (n1 != pos || n2 != text.size() - pos - 1) throw std::invalid_argument(text);
    if (!(lo < hi)) fail(ErrorKind::Validation, "range must satisfy lo < hi");
    return std::pair{lo, hi};
  } catch (const std::logic_error&) {
    fail(ErrorKind::Validation, "range must be 'lo,hi', got '" + text + "'");
  }
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) fail(ErrorKind::Io, "cannot read " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, p.string() + ": " + e.what());
  }
}

void print_info(const Dataset& d, bool as_json) {
  const auto& g = d.geometry;
  const auto cov = boundary_coverage(d.segmentation);
  if (as_json) {
    json j = {{"id", d.id},
              {"eye", std::string(to_string(g.eye))},
              {"width", g.width},
              {"n_bscans", g.n_bscans},
              {"bscan_height", g.bscan_height},
              {"res_axial_um", g.res_axial_um},
              {"res_lateral_um", g.res_lateral_um},
              {"res_bscan_um", g.res_bscan_um},
              {"fovea", {g.fovea_ix, g.fovea_iy}},
              {"layer_names", d.segmentation.layer_names},
              {"boundary_count", d.segmentation.boundary_count()},
              {"boundary_coverage", cov},
              {"has_volume", d.volume.has_value()},
              {"warnings", d.warnings}};
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::printf("id            %s\n", d.id.c_str());
  std::printf("eye           %s\n", std::string(to_string(g.eye)).c_str());
  std::printf("lattice       %d A-scans x %d B-scans, %d px deep\n", g.width, g.n_bscans, g.bscan_height);
  std::printf("resolution    axial %.3f um, lateral %.3f um, B-scan %.3f um\n", g.res_axial_um,
              g.res_lateral_um, g.res_bscan_um);
  std::printf("fovea         (%.2f, %.2f)\n", g.fovea_ix, g.fovea_iy);
  std::printf("volume        %s\n", d.volume ? "yes" : "no");
  std::printf("layers        %d\n", d.segmentation.layer_count());
  for (std::size_t i = 0; i < d.segmentation.layer_names.size(); ++i)
    std::printf("  %2zu %s\n", i, d.segmentation.layer_names[i].c_str());
  std::printf("boundaries    %d\n", d.segmentation.boundary_count());
  for (std::size_t i = 0; i < cov.size(); ++i) std::printf("  %2zu coverage %.2f%%\n", i, 100.0 * cov[i]);
  for (const auto& w : d.warnings) std::printf("warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-sectional OCT layer studies"};
  app.require_subcommand(1);

  StudyConfig cfg;
  std::vector<std::string> layers, attributes;
  std::string mode = "both", test = "welch_t", correction, palette = "sequential", range, out;
  auto* run = app.add_subcommand("run", "Compare a patient cohort against a control cohort");
  run->add_option("--patients", cfg.patients, "Directory of patient datasets")->required();
  run->add_option("--controls", cfg.controls, "Directory of control datasets")->required();
  run->add_option("--layer", layers, "Layer index or name (repeatable, comma separated)")->required();
  run->add_option("--attribute", attributes, "thickness, curvature, curvature_lower, reflectivity, ...")
      ->default_str("thickness");
  run->add_option("--mode", mode, "map, grid or both")->capture_default_str();
  run->add_option("--test", test, "welch_t or mann_whitney_u")->capture_default_str();
  run->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
  run->add_option("--correction", correction, "none, bonferroni or bh (default: bh for maps, none for grids)");
  run->add_option("--sd-threshold", cfg.sd_threshold, "Grid split threshold (attribute units)")
      ->capture_default_str();
  run->add_option("--max-depth", cfg.max_depth, "Grid refinement depth")->capture_default_str();
  run->add_option("--seed", cfg.seed, "Recorded in the manifest")->capture_default_str();
  run->add_option("--out", cfg.out, "Output directory")->required();
  run->add_option("--palette", palette, "Palette for rendered maps")->capture_default_str();
  run->add_option("--range", range, "Color range 'lo,hi'");

  std::string artifact, image;
  auto* render = app.add_subcommand("render", "Render a map or comparison artifact to PPM");
  render->add_option("artifact", artifact, "Artifact JSON file")->required();
  render->add_option("--out", image, "Output image (.ppm)")->required();
  render->add_option("--palette", palette, "sequential or diverging")->capture_default_str();
  render->add_option("--range", range, "Color range 'lo,hi'");

  std::string spec_file;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("spec", spec_file, "Cohort spec JSON")->required();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();

  std::string dataset_dir;
  bool as_json = false;
  auto* info = app.add_subcommand("info", "Describe a dataset");
  info->add_option("dataset", dataset_dir, "Dataset directory")->required();
  info->add_flag("--json", as_json, "Structured output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      cfg.layers = split_list(layers);
      for (const auto& a : split_list(attributes.empty() ? std::vector<std::string>{"thickness"} : attributes))
        cfg.attributes.push_back(AttributeKind::parse(a));
      cfg.mode = parse_study_mode(mode);
      cfg.test = parse_test_kind(test);
      if (!correction.empty()) cfg.correction = parse_correction(correction);
      cfg.render.palette = parse_palette(palette);
      cfg.render.range = parse_range(range);
      const StudyReport rep = run_study(cfg);
      for (const auto& t : rep.manifest["tasks"]) {
        std::printf("%s %s", t["layer"].get<std::string>().c_str(), t["attribute"].get<std::string>().c_str());
        if (t.contains("grid"))
          std::printf("  cells %zu/%zu significant", t["grid"]["significant_cells"].get<std::size_t>(),
                      t["grid"]["leaf_count"].get<std::size_t>());
        if (t.contains("map"))
          std::printf("  points %zu/%zu significant, %zu regions, %.4f mm2",
                      t["map"]["significant_points"].get<std::size_t>(),
                      t["map"]["tested_points"].get<std::size_t>(), t["map"]["regions"].get<std::size_t>(),
                      t["map"]["significant_area_mm2"].get<double>());
        std::printf("\n");
      }
      return 0;
    }
    if (*render) {
      RenderOptions ro;
      ro.palette = parse_palette(palette);
      ro.range = parse_range(range);
      write_ppm(image, render_artifact(read_json(artifact), ro));
      return 0;
    }
    if (*synth) {
      CohortSpec spec;
      try {
        spec = read_json(spec_file).get<CohortSpec>();
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Spec, std::string("bad cohort spec: ") + e.what());
      }
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) fail(ErrorKind::Io, "cannot create " + out + ": " + ec.message());
      for (const auto& d : generate_synthetic_cohort(spec, seed)) {
        save_dataset(d, fs::path(out) / d.id);
        std::printf("%s\n", (fs::path(out) / d.id).string().c_str());
      }
      return 0;
    }
    if (*info) {
      print_info(load_dataset(dataset_dir), as_json);
      return 0;
    }
  } catch (const Error& e) {
    return report(e);
  }
  return 0;
}
