#pragma once

#include <span>
#include <string>
#include <vector>

#include "octlayers/grid.hpp"
#include "octlayers/hypothesis.hpp"

namespace octlayers {

struct CompareConfig {
  TestKind test = TestKind::WelchT;
  double alpha = 0.05;
  Correction correction = Correction::BenjaminiHochberg;
  int min_samples = 3;
};

/// One tested unit (lattice point or grid cell). Fields other than `tested`
/// are meaningful only when tested.
struct ComparisonRecord {
  bool tested = false;
  std::size_t n_p = 0;
  std::size_t n_c = 0;
  double mean_p = 0.0;
  double mean_c = 0.0;
  double diff = 0.0;  // patient - control
  double statistic = 0.0;
  double p = 1.0;
  double d = 0.0;  // Cohen's d
  bool significant = false;
};

struct ComparisonMap {
  EnFaceDomain domain;
  int layer_id = 0;
  AttributeKind kind;
  CompareConfig config;
  double threshold = 0.0;  // adjusted p threshold
  std::size_t tested_count = 0;
  std::size_t significant_count = 0;
  std::vector<ComparisonRecord> records;  // row-major over the lattice

  const ComparisonRecord& at(int ix, int iy) const {
    return records[static_cast<std::size_t>(iy) * domain.width + ix];
  }
};

struct CellComparison {
  AdaptiveGrid grid;
  CompareConfig config;
  double threshold = 0.0;
  std::vector<std::string> cell_ids;  // leaves, in grid order
  std::vector<ComparisonRecord> records;

  const ComparisonRecord& at(std::string_view cell_id) const;
};

/// Checks that both groups have >= min_samples maps on one domain.
void check_groups(std::span<const AttributeMap> patients, std::span<const AttributeMap> controls,
                  int min_samples);

/// Test + effect size + group means for two samples; untested if either
/// sample is smaller than min_samples.
ComparisonRecord compare_samples(std::span<const double> patients, std::span<const double> controls,
                                 const CompareConfig& config);

ComparisonMap compare_pointwise(std::span<const AttributeMap> patients,
                                std::span<const AttributeMap> controls, const CompareConfig& config);

/// Per leaf: reliable per-subject cell means form the two samples.
CellComparison compare_gridwise(const AdaptiveGrid& grid, std::span<const AttributeMap> patients,
                                std::span<const AttributeMap> controls, const CompareConfig& config,
                                const SummaryThresholds& thresholds = {});

}  // namespace octlayers
