#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "octlayers/geometry.hpp"
#include "octlayers/raster.hpp"

namespace octlayers {

/// Axial position (px, fractional) of one segmented boundary per A-scan.
/// NaN marks points where the segmentation is missing.
using BoundarySurface = Raster<float>;

/// Ordered boundaries, top (vitreous side) to bottom. Layer i lies between
/// boundaries i and i + 1.
struct Segmentation {
  std::vector<BoundarySurface> boundaries;
  std::vector<std::string> layer_names;

  int layer_count() const { return static_cast<int>(layer_names.size()); }
  int boundary_count() const { return static_cast<int>(boundaries.size()); }

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

/// 8-bit intensity volume, layout [bscan][row][x].
class Volume {
 public:
  Volume() = default;
  Volume(int width, int bscan_height, int n_bscans, std::uint8_t fill = 0)
      : width_(width), bscan_height_(bscan_height), n_bscans_(n_bscans),
        data_(static_cast<std::size_t>(width) * bscan_height * n_bscans, fill) {}

  int width() const noexcept { return width_; }
  int bscan_height() const noexcept { return bscan_height_; }
  int n_bscans() const noexcept { return n_bscans_; }

  std::uint8_t& at(int ix, int row, int iy) { return data_[index(ix, row, iy)]; }
  std::uint8_t at(int ix, int row, int iy) const { return data_[index(ix, row, iy)]; }

  std::vector<std::uint8_t>& bytes() noexcept { return data_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  std::size_t index(int ix, int row, int iy) const noexcept {
    return (static_cast<std::size_t>(iy) * bscan_height_ + row) * width_ + ix;
  }

  int width_ = 0;
  int bscan_height_ = 0;
  int n_bscans_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Dataset {
  std::string id;
  AcquisitionGeometry geometry;
  Segmentation segmentation;
  std::optional<Volume> volume;
  std::optional<std::string> group_label;
  /// Soft validation warnings collected at load time (not persisted).
  std::vector<std::string> warnings;

  EnFaceDomain domain() const { return geometry.enface(); }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.id == b.id && a.geometry == b.geometry && a.segmentation == b.segmentation &&
           a.volume == b.volume && a.group_label == b.group_label;
  }
};

/// Checks every Dataset invariant: geometry, array shapes, boundary value
/// range and monotone ordering. Throws Error(Validation) whose message names
/// the first offending point; details carry up to 32 further violations.
/// Returns the soft warnings.
std::vector<std::string> validate_dataset(const Dataset& dataset);

/// Fraction of valid (non-NaN) points per boundary.
std::vector<double> boundary_coverage(const Segmentation& segmentation);

/// The conventional 11 retinal layer names, inner to outer.
const std::vector<std::string>& default_layer_names();

}  // namespace octlayers
