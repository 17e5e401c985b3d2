#pragma once

#include <atomic>
#include <fstream>
#include <iterator>
#include <filesystem>
#include <random>
#include <string>

#include "octlayers/dataset_io.hpp"
#include "octlayers/synthetic.hpp"

namespace octtest {

namespace fs = std::filesystem;

inline octlayers::AcquisitionGeometry geometry(int width, int n_bscans, double res_lateral_um,
                                               double res_bscan_um,
                                               octlayers::Eye eye = octlayers::Eye::Right) {
  octlayers::AcquisitionGeometry g;
  g.width = width;
  g.n_bscans = n_bscans;
  g.bscan_height = 496;
  g.res_axial_um = 3.5;
  g.res_lateral_um = res_lateral_um;
  g.res_bscan_um = res_bscan_um;
  g.fovea_ix = (width - 1) / 2.0;
  g.fovea_iy = (n_bscans - 1) / 2.0;
  g.eye = eye;
  return g;
}

/// 128 x 64 lattice, 50 x 100 um, covers the 6 mm disc.
inline octlayers::CohortSpec small_spec(int n, double noise_sd = 3.0, double undulation = 4.0) {
  octlayers::CohortSpec s;
  s.n_datasets = n;
  s.geometry = geometry(128, 64, 50.0, 100.0);
  s.base_thickness_um = octlayers::typical_layer_thickness_um();
  s.base_surface_amplitude_um = 20.0;
  s.undulation_amplitude_um = undulation;
  s.noise_sd_um = noise_sd;
  return s;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "oct") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_cohort(const std::vector<octlayers::Dataset>& ds, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& d : ds) octlayers::save_dataset(d, dir / d.id);
}

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace octtest
