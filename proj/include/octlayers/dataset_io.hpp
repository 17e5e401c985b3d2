#pragma once

#include <filesystem>

#include "octlayers/dataset.hpp"

namespace octlayers {

inline constexpr int kDatasetSchemaVersion = 1;

// Directory layout:
//   meta.json       schema_version, id, eye, width, n_bscans, bscan_height,
//                   res_axial_um, res_lateral_um, res_bscan_um, fovea_ix,
//                   fovea_iy, layer_names[], group_label
//   boundaries.f32  little-endian float32, [boundary][bscan][x], NaN = invalid
//   volume.u8       optional, [bscan][row][x]

Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// True if dir looks like a dataset directory (has meta.json).
bool is_dataset_dir(const std::filesystem::path& dir);

}  // namespace octlayers
