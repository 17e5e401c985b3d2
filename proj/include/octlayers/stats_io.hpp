#pragma once

#include <nlohmann/json.hpp>

#include "octlayers/comparison.hpp"
#include "octlayers/control_model.hpp"
#include "octlayers/measure.hpp"
#include "octlayers/regions.hpp"

namespace octlayers {

nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const CompareConfig& c);
/// Missing keys keep their defaults.
CompareConfig compare_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ComparisonRecord& r);
nlohmann::json to_json(const MeasurementSummary& m);
nlohmann::json to_json(const Region& r);

// Artifacts carry a "kind" key and base64 arrays (see encoding.hpp).
nlohmann::json attribute_map_to_json(const AttributeMap& map);
AttributeMap attribute_map_from_json(const nlohmann::json& doc);

/// Layers: diff, p, d, statistic, mean_p, mean_c, n_p, n_c (float64, valid
/// where tested) plus uint8 tested / significant.
nlohmann::json comparison_map_to_json(const ComparisonMap& cmp);
ComparisonMap comparison_map_from_json(const nlohmann::json& doc);

nlohmann::json cell_comparison_to_json(const CellComparison& cmp);
CellComparison cell_comparison_from_json(const nlohmann::json& doc);

nlohmann::json deviation_map_to_json(const DeviationMap& dev);
DeviationMap deviation_map_from_json(const nlohmann::json& doc);

}  // namespace octlayers
