#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "octlayers/dataset.hpp"

namespace octlayers {

/// A disc of changed thickness in one layer. Center is in the normalized
/// physical frame (mm from the fovea, +x nasal).
struct DefectSpec {
  double center_x_mm = 0.0;
  double center_y_mm = 0.0;
  double radius_mm = 0.5;
  int layer = 0;
  double delta_um = 0.0;

  bool contains(PhysicalPoint p) const;
};

struct CohortSpec {
  int n_datasets = 1;
  AcquisitionGeometry geometry;
  std::vector<std::string> layer_names = default_layer_names();
  std::vector<double> base_thickness_um;   // one per layer
  double top_um = 150.0;                   // depth of the first boundary
  double base_surface_amplitude_um = 0.0;  // shared low-frequency shape of the stack
  double undulation_amplitude_um = 0.0;    // per-dataset, per-layer smooth variation
  double undulation_wavelength_mm = 5.0;
  double noise_sd_um = 0.0;                // per-point thickness noise
  std::vector<DefectSpec> defects;
  std::string id_prefix = "synth";
  std::string group_label;
  bool with_volume = false;

  /// Throws Error(Spec) if these settings produce a non-positive thickness or
  /// a stack deeper than the B-scan.
  void validate() const;
};

/// Deterministic for fixed (spec, seed). Boundaries are the base surface
/// plus cumulative layer thicknesses; each thickness is base + undulation +
/// noise + defects, clamped at zero so ordering holds by construction.
std::vector<Dataset> generate_synthetic_cohort(const CohortSpec& spec, std::uint64_t seed);

/// 1 where the defect disc covers the lattice point.
Mask defect_mask(const EnFaceDomain& domain, const DefectSpec& defect);

/// A typical 11-layer macular thickness profile (µm).
std::vector<double> typical_layer_thickness_um();

void to_json(nlohmann::json& j, const DefectSpec& d);
void from_json(const nlohmann::json& j, DefectSpec& d);
void to_json(nlohmann::json& j, const CohortSpec& s);
void from_json(const nlohmann::json& j, CohortSpec& s);
void to_json(nlohmann::json& j, const AcquisitionGeometry& g);
void from_json(const nlohmann::json& j, AcquisitionGeometry& g);

}  // namespace octlayers
