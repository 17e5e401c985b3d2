#pragma once

#include <nlohmann/json.hpp>

#include "octlayers/grid.hpp"

namespace octlayers {

nlohmann::json to_json(const CellSummary& s);
CellSummary summary_from_json(const nlohmann::json& j);

/// Tree document: layout, nested cells (ids, bounds, depth, summaries) and
/// provenance. Angles are radians in the normalized frame.
nlohmann::json grid_to_json(const AdaptiveGrid& grid);

/// Rebuilds the tree (without a summary source; stored summaries are kept).
/// Throws Error(Format) on malformed documents.
AdaptiveGrid grid_from_json(const nlohmann::json& doc);

}  // namespace octlayers
