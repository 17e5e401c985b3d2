#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "octlayers/geometry.hpp"
#include "octlayers/raster.hpp"

namespace octlayers {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Binary arrays travel as
//   {"dtype": "float64", "byteorder": "little", "shape": [rows, cols], "data": <base64>}
// and a companion uint8 "valid" array. Invalid entries are written as 0.0 so
// payloads never contain NaN.
nlohmann::json encode_values(const Raster<double>& values);
Raster<double> decode_values(const nlohmann::json& payload);
nlohmann::json encode_bytes(const Raster<std::uint8_t>& values);
Raster<std::uint8_t> decode_bytes(const nlohmann::json& payload);

/// Number or null (for invalid / non-finite).
nlohmann::json number_or_null(double v);

nlohmann::json to_json(const EnFaceDomain& domain);
EnFaceDomain domain_from_json(const nlohmann::json& j);

}  // namespace octlayers
