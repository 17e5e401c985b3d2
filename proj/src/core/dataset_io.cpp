#include "octlayers/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "octlayers/error.hpp"

namespace octlayers {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetaFile = "meta.json";
constexpr const char* kBoundaryFile = "boundaries.f32";
constexpr const char* kVolumeFile = "volume.u8";

std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Format, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Format, "read failed: " + path.string());
  return bytes;
}

void write_file(const fs::path& path, const char* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(size));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

float load_le_float(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

void store_le_float(float v, char* p) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  std::memcpy(p, &bits, 4);
}

template <typename T>
T required(const json& meta, const char* key, const fs::path& file) {
  if (!meta.contains(key)) fail(ErrorKind::Format, file.string() + ": missing key '" + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, file.string() + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

bool is_dataset_dir(const fs::path& dir) { return fs::is_regular_file(dir / kMetaFile); }

Dataset load_dataset(const fs::path& dir) {
  const fs::path meta_path = dir / kMetaFile;
  if (!fs::exists(meta_path)) fail(ErrorKind::Format, "missing file " + meta_path.string());
  const auto meta_bytes = read_file(meta_path);

  json meta;
  try {
    meta = json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, meta_path.string() + ": " + e.what());
  }
  if (!meta.is_object()) fail(ErrorKind::Format, meta_path.string() + ": not a JSON object");

  const int version = required<int>(meta, "schema_version", meta_path);
  if (version != kDatasetSchemaVersion)
    fail(ErrorKind::Format, meta_path.string() + ": unsupported schema_version " +
                                std::to_string(version));

  Dataset d;
  d.id = required<std::string>(meta, "id", meta_path);
  auto& g = d.geometry;
  g.eye = parse_eye(required<std::string>(meta, "eye", meta_path));
  g.width = required<int>(meta, "width", meta_path);
  g.n_bscans = required<int>(meta, "n_bscans", meta_path);
  g.bscan_height = required<int>(meta, "bscan_height", meta_path);
  g.res_axial_um = required<double>(meta, "res_axial_um", meta_path);
  g.res_lateral_um = required<double>(meta, "res_lateral_um", meta_path);
  g.res_bscan_um = required<double>(meta, "res_bscan_um", meta_path);
  g.fovea_ix = required<double>(meta, "fovea_ix", meta_path);
  g.fovea_iy = required<double>(meta, "fovea_iy", meta_path);
  d.segmentation.layer_names = required<std::vector<std::string>>(meta, "layer_names", meta_path);
  if (meta.contains("group_label") && !meta["group_label"].is_null())
    d.group_label = required<std::string>(meta, "group_label", meta_path);

  // Geometry must be sane before array sizes can be trusted.
  g.validate();

  const fs::path boundary_path = dir / kBoundaryFile;
  if (!fs::exists(boundary_path)) fail(ErrorKind::Format, "missing file " + boundary_path.string());
  const auto raw = read_file(boundary_path);
  const std::size_t per_surface = static_cast<std::size_t>(g.width) * g.n_bscans;
  const std::size_t surface_bytes = per_surface * 4;
  const int declared = d.segmentation.layer_count() + 1;
  if (raw.size() % surface_bytes != 0) {
    fail(ErrorKind::Format, boundary_path.string() + ": size " + std::to_string(raw.size()) +
                                " is not a multiple of one surface (" +
                                std::to_string(surface_bytes) + " bytes)");
  }
  const int found = static_cast<int>(raw.size() / surface_bytes);
  if (found != declared) {
    fail(ErrorKind::Validation,
         "shape mismatch in " + boundary_path.string() + ": expected " + std::to_string(declared) +
             " surfaces, found " + std::to_string(found),
         {"expected " + std::to_string(declared) + " x " + std::to_string(g.n_bscans) + " x " +
              std::to_string(g.width),
          "found " + std::to_string(found) + " x " + std::to_string(g.n_bscans) + " x " +
              std::to_string(g.width)});
  }
  const char* p = raw.data();
  for (int k = 0; k < found; ++k) {
    BoundarySurface surface(g.width, g.n_bscans);
    for (auto& v : surface.values()) {
      v = load_le_float(p);
      p += 4;
    }
    d.segmentation.boundaries.push_back(std::move(surface));
  }

  const fs::path volume_path = dir / kVolumeFile;
  if (fs::exists(volume_path)) {
    auto bytes = read_file(volume_path);
    const std::size_t expected = per_surface * static_cast<std::size_t>(g.bscan_height);
    if (bytes.size() != expected) {
      fail(ErrorKind::Validation, "shape mismatch in " + volume_path.string() + ": expected " +
                                      std::to_string(expected) + " bytes, found " +
                                      std::to_string(bytes.size()));
    }
    Volume vol(g.width, g.bscan_height, g.n_bscans);
    std::memcpy(vol.bytes().data(), bytes.data(), bytes.size());
    d.volume = std::move(vol);
  }

  d.warnings = validate_dataset(d);
  return d;
}

void save_dataset(const Dataset& d, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  const auto& g = d.geometry;
  json meta = {
      {"schema_version", kDatasetSchemaVersion},
      {"id", d.id},
      {"eye", std::string(to_string(g.eye))},
      {"width", g.width},
      {"n_bscans", g.n_bscans},
      {"bscan_height", g.bscan_height},
      {"res_axial_um", g.res_axial_um},
      {"res_lateral_um", g.res_lateral_um},
      {"res_bscan_um", g.res_bscan_um},
      {"fovea_ix", g.fovea_ix},
      {"fovea_iy", g.fovea_iy},
      {"layer_names", d.segmentation.layer_names},
      {"group_label", d.group_label ? json(*d.group_label) : json(nullptr)},
  };
  const std::string text = meta.dump(2) + "\n";
  write_file(dir / kMetaFile, text.data(), text.size());

  std::vector<char> raw;
  for (const auto& b : d.segmentation.boundaries) {
    const std::size_t offset = raw.size();
    raw.resize(offset + b.size() * 4);
    char* p = raw.data() + offset;
    for (float v : b.values()) {
      store_le_float(v, p);
      p += 4;
    }
  }
  write_file(dir / kBoundaryFile, raw.data(), raw.size());

  const fs::path volume_path = dir / kVolumeFile;
  if (d.volume) {
    const auto& bytes = d.volume->bytes();
    write_file(volume_path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
  } else if (fs::exists(volume_path)) {
    fs::remove(volume_path, ec);
  }
}

}  // namespace octlayers
