#include "octlayers/dataset.hpp"

#include <cmath>
#include <string>

#include "octlayers/error.hpp"

namespace octlayers {

namespace {

constexpr std::size_t kMaxReportedIssues = 32;

std::string point_str(int ix, int iy) {
  return "(ix=" + std::to_string(ix) + ", iy=" + std::to_string(iy) + ")";
}

}  // namespace

const std::vector<std::string>& default_layer_names() {
  static const std::vector<std::string> names = {"RNFL", "GCL", "IPL", "INL", "OPL", "ONL",
                                                 "MZ",   "EZ",  "OS",  "IZ",  "RPE"};
  return names;
}

std::vector<std::string> validate_dataset(const Dataset& dataset) {
  std::vector<std::string> warnings = dataset.geometry.validate();
  const auto& g = dataset.geometry;
  const auto& seg = dataset.segmentation;

  std::vector<std::string> issues;
  auto add = [&](std::string s) {
    if (issues.size() < kMaxReportedIssues) issues.push_back(std::move(s));
  };

  if (seg.layer_names.empty()) add("segmentation has no layers");
  if (seg.boundary_count() != seg.layer_count() + 1) {
    add("shape mismatch: expected " + std::to_string(seg.layer_count() + 1) +
        " boundaries for " + std::to_string(seg.layer_count()) + " layers, found " +
        std::to_string(seg.boundary_count()));
  }
  for (int k = 0; k < seg.boundary_count(); ++k) {
    const auto& b = seg.boundaries[k];
    if (b.width() != g.width || b.height() != g.n_bscans) {
      add("shape mismatch: boundary " + std::to_string(k) + " expected " +
          std::to_string(g.n_bscans) + "x" + std::to_string(g.width) + ", found " +
          std::to_string(b.height()) + "x" + std::to_string(b.width()));
    }
  }
  if (dataset.volume) {
    const auto& v = *dataset.volume;
    if (v.width() != g.width || v.bscan_height() != g.bscan_height || v.n_bscans() != g.n_bscans) {
      add("shape mismatch: volume expected " + std::to_string(g.n_bscans) + "x" +
          std::to_string(g.bscan_height) + "x" + std::to_string(g.width) + ", found " +
          std::to_string(v.n_bscans()) + "x" + std::to_string(v.bscan_height()) + "x" +
          std::to_string(v.width()));
    }
  }
  if (!issues.empty()) fail(ErrorKind::Validation, issues.front(), issues);

  const float height = static_cast<float>(g.bscan_height);
  for (int k = 0; k < seg.boundary_count(); ++k) {
    const auto& b = seg.boundaries[k];
    for (int iy = 0; iy < g.n_bscans; ++iy) {
      for (int ix = 0; ix < g.width; ++ix) {
        const float v = b(ix, iy);
        if (std::isnan(v)) continue;
        if (!std::isfinite(v) || v < 0.0f || v > height) {
          add("boundary " + std::to_string(k) + " value " + std::to_string(v) +
              " outside [0, bscan_height] at " + point_str(ix, iy));
        }
      }
    }
  }
  for (int k = 0; k + 1 < seg.boundary_count(); ++k) {
    const auto& upper = seg.boundaries[k];
    const auto& lower = seg.boundaries[k + 1];
    for (int iy = 0; iy < g.n_bscans; ++iy) {
      for (int ix = 0; ix < g.width; ++ix) {
        const float a = upper(ix, iy), c = lower(ix, iy);
        if (std::isnan(a) || std::isnan(c)) continue;
        if (a > c) {
          add("boundary ordering violated: layer " + std::to_string(k) + " (" +
              (k < seg.layer_count() ? seg.layer_names[k] : std::string("?")) + ") at " +
              point_str(ix, iy) + ": boundary " + std::to_string(k) + "=" + std::to_string(a) +
              " below boundary " + std::to_string(k + 1) + "=" + std::to_string(c));
        }
      }
    }
  }
  if (!issues.empty()) fail(ErrorKind::Validation, issues.front(), issues);
  return warnings;
}

std::vector<double> boundary_coverage(const Segmentation& segmentation) {
  std::vector<double> out;
  for (const auto& b : segmentation.boundaries) {
    std::size_t valid = 0;
    for (float v : b.values()) valid += std::isnan(v) ? 0 : 1;
    out.push_back(b.size() == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(b.size()));
  }
  return out;
}

}  // namespace octlayers
