#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "octlayers/comparison.hpp"
#include "octlayers/dataset.hpp"
#include "octlayers/measure.hpp"
#include "octlayers/regions.hpp"
#include "octlayers/render.hpp"

namespace octlayers {

enum class StudyMode { Map, Grid, Both };

std::string_view to_string(StudyMode m);
StudyMode parse_study_mode(std::string_view text);

inline constexpr const char* kCsvSchemaVersion = "1";

struct StudyConfig {
  std::filesystem::path patients;
  std::filesystem::path controls;
  std::vector<std::string> layers;           // index or name
  std::vector<AttributeKind> attributes;
  StudyMode mode = StudyMode::Both;
  TestKind test = TestKind::WelchT;
  double alpha = 0.05;
  /// Unset: Benjamini-Hochberg for point-wise maps, none for grid cells.
  std::optional<Correction> correction;
  double sd_threshold = 5.0;
  int max_depth = 3;
  std::uint64_t seed = 0;  // echoed; the pipeline itself is not random
  RenderOptions render;
  std::filesystem::path out;

  /// Throws Error(Validation) listing every problem.
  void validate() const;
  CompareConfig map_compare() const;
  CompareConfig grid_compare() const;
};

nlohmann::json to_json(const StudyConfig& c);

struct CohortEntry {
  std::string dir;  // directory name
  Dataset dataset;
};

/// Every dataset directory below `dir`, sorted by name, loaded concurrently.
std::vector<CohortEntry> load_cohort(const std::filesystem::path& dir);

struct StudyTaskResult {
  std::string layer_name;
  int layer_id = 0;
  AttributeKind kind;
  std::optional<CellComparison> cells;
  std::optional<ComparisonMap> map;
  std::vector<Region> regions;
  std::vector<MeasurementSummary> region_measures;  // parallel to regions

  double significant_area_mm2() const;
};

struct StudyReport {
  std::vector<StudyTaskResult> tasks;
  nlohmann::json manifest;
};

/// Runs the whole study in memory (no files written).
StudyReport evaluate_study(const StudyConfig& config, const std::vector<CohortEntry>& patients,
                           const std::vector<CohortEntry>& controls);

/// Loads, evaluates and writes cells.csv, regions.csv, per-task artifacts
/// and images, and manifest.json into config.out.
StudyReport run_study(const StudyConfig& config);

std::string cells_csv(const StudyReport& report);
std::string regions_csv(const StudyReport& report);

}  // namespace octlayers
