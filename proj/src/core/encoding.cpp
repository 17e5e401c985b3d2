#include "octlayers/encoding.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>

#include "octlayers/error.hpp"

namespace octlayers {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_reverse() {
  std::array<int, 256> r{};
  for (auto& v : r) v = -1;
  for (int i = 0; i < 64; ++i) r[static_cast<unsigned char>(kAlphabet[i])] = i;
  return r;
}
constexpr auto kReverse = make_reverse();

std::array<int, 2> shape_of(const json& payload) {
  const auto& s = payload.at("shape");
  return {s.at(0).get<int>(), s.at(1).get<int>()};
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t n = bytes[i] << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = kReverse[static_cast<unsigned char>(c)];
    if (v < 0) fail(ErrorKind::Format, "invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

json encode_values(const Raster<double>& values) {
  std::vector<std::uint8_t> data(values.size() * 8);
  std::vector<std::uint8_t> valid(values.size());
  std::size_t i = 0;
  for (double v : values.values()) {
    const bool ok = std::isfinite(v);
    valid[i] = ok ? 1 : 0;
    auto bits = std::bit_cast<std::uint64_t>(ok ? v : 0.0);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(data.data() + 8 * i, &bits, 8);
    ++i;
  }
  return {{"dtype", "float64"},
          {"byteorder", "little"},
          {"shape", {values.height(), values.width()}},
          {"data", base64_encode(data)},
          {"valid", base64_encode(valid)}};
}

Raster<double> decode_values(const json& payload) {
  if (payload.value("dtype", "") != "float64") fail(ErrorKind::Format, "expected float64 array");
  const auto [rows, cols] = shape_of(payload);
  const auto data = base64_decode(payload.at("data").get<std::string>());
  const auto valid = base64_decode(payload.at("valid").get<std::string>());
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (data.size() != n * 8 || valid.size() != n) fail(ErrorKind::Format, "array size mismatch");
  Raster<double> out(cols, rows);
  auto dst = out.values();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, data.data() + 8 * i, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    dst[i] = valid[i] ? std::bit_cast<double>(bits) : invalid_value<double>();
  }
  return out;
}

json encode_bytes(const Raster<std::uint8_t>& values) {
  return {{"dtype", "uint8"},
          {"shape", {values.height(), values.width()}},
          {"data", base64_encode(values.values())}};
}

Raster<std::uint8_t> decode_bytes(const json& payload) {
  if (payload.value("dtype", "") != "uint8") fail(ErrorKind::Format, "expected uint8 array");
  const auto [rows, cols] = shape_of(payload);
  const auto data = base64_decode(payload.at("data").get<std::string>());
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    fail(ErrorKind::Format, "array size mismatch");
  Raster<std::uint8_t> out(cols, rows);
  std::memcpy(out.values().data(), data.data(), data.size());
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const EnFaceDomain& d) {
  return {{"width", d.width},
          {"n_bscans", d.n_bscans},
          {"res_lateral_um", d.res_lateral_um},
          {"res_bscan_um", d.res_bscan_um},
          {"fovea_ix", d.fovea_ix},
          {"fovea_iy", d.fovea_iy},
          {"eye", std::string(to_string(d.eye))}};
}

EnFaceDomain domain_from_json(const json& j) {
  EnFaceDomain d;
  d.width = j.at("width").get<int>();
  d.n_bscans = j.at("n_bscans").get<int>();
  d.res_lateral_um = j.at("res_lateral_um").get<double>();
  d.res_bscan_um = j.at("res_bscan_um").get<double>();
  d.fovea_ix = j.at("fovea_ix").get<double>();
  d.fovea_iy = j.at("fovea_iy").get<double>();
  d.eye = parse_eye(j.at("eye").get<std::string>());
  return d;
}

}  // namespace octlayers
