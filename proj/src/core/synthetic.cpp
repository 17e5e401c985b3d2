#include "octlayers/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "octlayers/error.hpp"

namespace octlayers {

using nlohmann::json;

namespace {

constexpr double kBaseSurfaceWavelengthMm = 8.0;
constexpr std::uint8_t kBackgroundIntensity = 20;
constexpr std::uint8_t kLayerIntensity[] = {210, 110, 160, 80, 150, 60, 120, 230, 100, 190, 245};

struct Undulation {
  double kx = 0.0, ky = 0.0, phase = 0.0;
};

}  // namespace

bool DefectSpec::contains(PhysicalPoint p) const {
  const double dx = p.x_mm - center_x_mm, dy = p.y_mm - center_y_mm;
  return dx * dx + dy * dy <= radius_mm * radius_mm;
}

std::vector<double> typical_layer_thickness_um() {
  return {40.0, 45.0, 38.0, 35.0, 30.0, 80.0, 15.0, 20.0, 25.0, 12.0, 22.0};
}

void CohortSpec::validate() const {
  if (n_datasets < 1) fail(ErrorKind::Spec, "n_datasets must be >= 1");
  try {
    geometry.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Spec, std::string("cohort geometry: ") + e.what(), e.details());
  }
  const int layers = static_cast<int>(layer_names.size());
  if (layers < 1) fail(ErrorKind::Spec, "at least one layer required");
  if (static_cast<int>(base_thickness_um.size()) != layers)
    fail(ErrorKind::Spec, "base_thickness_um needs " + std::to_string(layers) + " entries, got " +
                              std::to_string(base_thickness_um.size()));
  if (noise_sd_um < 0.0) fail(ErrorKind::Spec, "noise_sd_um must be >= 0");
  if (undulation_amplitude_um < 0.0 || base_surface_amplitude_um < 0.0)
    fail(ErrorKind::Spec, "amplitudes must be >= 0");
  if (!(undulation_wavelength_mm > 0.0)) fail(ErrorKind::Spec, "undulation_wavelength_mm must be > 0");

  std::vector<double> worst_low(base_thickness_um), worst_high(base_thickness_um);
  for (int k = 0; k < layers; ++k) {
    worst_low[k] -= undulation_amplitude_um;
    worst_high[k] += undulation_amplitude_um;
  }
  for (const auto& d : defects) {
    if (d.layer < 0 || d.layer >= layers)
      fail(ErrorKind::Spec, "defect layer " + std::to_string(d.layer) + " out of range");
    if (!(d.radius_mm > 0.0)) fail(ErrorKind::Spec, "defect radius must be > 0");
    if (d.delta_um < 0.0) worst_low[d.layer] += d.delta_um;
    else worst_high[d.layer] += d.delta_um;
  }
  for (int k = 0; k < layers; ++k) {
    if (!(worst_low[k] > 0.0)) {
      fail(ErrorKind::Spec, "layer " + std::to_string(k) + " (" + layer_names[k] +
                                ") thickness can reach " + std::to_string(worst_low[k]) +
                                " um; must stay positive");
    }
  }
  double depth = top_um + base_surface_amplitude_um;
  for (double t : worst_high) depth += t;
  const double available = geometry.bscan_height * geometry.res_axial_um;
  if (top_um - base_surface_amplitude_um < 0.0)
    fail(ErrorKind::Spec, "top_um must exceed base_surface_amplitude_um");
  if (depth > available)
    fail(ErrorKind::Spec, "layer stack depth " + std::to_string(depth) +
                              " um exceeds B-scan depth " + std::to_string(available) + " um");
}

std::vector<Dataset> generate_synthetic_cohort(const CohortSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto& g = spec.geometry;
  const EnFaceDomain domain = g.enface();
  const int layers = static_cast<int>(spec.layer_names.size());
  const double to_px = 1.0 / g.res_axial_um;
  const double max_px = static_cast<double>(g.bscan_height);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<Dataset> out;
  out.reserve(spec.n_datasets);
  for (int n = 0; n < spec.n_datasets; ++n) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<Undulation> und(layers);
    for (auto& u : und) {
      const double dir = two_pi * unit(rng);
      const double k = two_pi / spec.undulation_wavelength_mm;
      u = {k * std::cos(dir), k * std::sin(dir), two_pi * unit(rng)};
    }

    Dataset d;
    char id[64];
    std::snprintf(id, sizeof id, "%s-%03d", spec.id_prefix.c_str(), n);
    d.id = id;
    d.geometry = g;
    d.segmentation.layer_names = spec.layer_names;
    if (!spec.group_label.empty()) d.group_label = spec.group_label;
    d.segmentation.boundaries.assign(layers + 1, BoundarySurface(g.width, g.n_bscans));

    for (int iy = 0; iy < g.n_bscans; ++iy) {
      for (int ix = 0; ix < g.width; ++ix) {
        const PhysicalPoint p = domain.to_physical(ix, iy);
        const double ks = two_pi / kBaseSurfaceWavelengthMm;
        double z_um = spec.top_um;
        if (spec.base_surface_amplitude_um > 0.0)
          z_um += spec.base_surface_amplitude_um * 0.5 *
                  (std::cos(ks * p.x_mm) + std::cos(ks * p.y_mm));
        double z = std::min(z_um * to_px, max_px);
        d.segmentation.boundaries[0](ix, iy) = static_cast<float>(z);
        for (int k = 0; k < layers; ++k) {
          double t = spec.base_thickness_um[k];
          if (spec.undulation_amplitude_um > 0.0)
            t += spec.undulation_amplitude_um *
                 std::sin(und[k].kx * p.x_mm + und[k].ky * p.y_mm + und[k].phase);
          if (spec.noise_sd_um > 0.0) t += spec.noise_sd_um * noise(rng);
          for (const auto& def : spec.defects)
            if (def.layer == k && def.contains(p)) t += def.delta_um;
          z = std::min(z + std::max(t, 0.0) * to_px, max_px);
          d.segmentation.boundaries[k + 1](ix, iy) = static_cast<float>(z);
        }
      }
    }

    if (spec.with_volume) {
      Volume vol(g.width, g.bscan_height, g.n_bscans, kBackgroundIntensity);
      for (int iy = 0; iy < g.n_bscans; ++iy) {
        for (int ix = 0; ix < g.width; ++ix) {
          for (int k = 0; k < layers; ++k) {
            const double upper = d.segmentation.boundaries[k](ix, iy);
            const double lower = d.segmentation.boundaries[k + 1](ix, iy);
            const auto value = kLayerIntensity[k % std::size(kLayerIntensity)];
            for (int row = static_cast<int>(std::ceil(upper));
                 row < std::min<double>(lower, g.bscan_height); ++row)
              vol.at(ix, row, iy) = value;
          }
        }
      }
      d.volume = std::move(vol);
    }
    out.push_back(std::move(d));
  }
  return out;
}

Mask defect_mask(const EnFaceDomain& domain, const DefectSpec& defect) {
  Mask mask(domain.width, domain.n_bscans, 0);
  for (int iy = 0; iy < domain.n_bscans; ++iy)
    for (int ix = 0; ix < domain.width; ++ix)
      mask(ix, iy) = defect.contains(domain.to_physical(ix, iy)) ? 1 : 0;
  return mask;
}

void to_json(json& j, const AcquisitionGeometry& g) {
  j = {{"width", g.width},
       {"n_bscans", g.n_bscans},
       {"bscan_height", g.bscan_height},
       {"res_axial_um", g.res_axial_um},
       {"res_lateral_um", g.res_lateral_um},
       {"res_bscan_um", g.res_bscan_um},
       {"fovea_ix", g.fovea_ix},
       {"fovea_iy", g.fovea_iy},
       {"eye", std::string(to_string(g.eye))}};
}

void from_json(const json& j, AcquisitionGeometry& g) {
  g.width = j.at("width").get<int>();
  g.n_bscans = j.at("n_bscans").get<int>();
  g.bscan_height = j.at("bscan_height").get<int>();
  g.res_axial_um = j.at("res_axial_um").get<double>();
  g.res_lateral_um = j.at("res_lateral_um").get<double>();
  g.res_bscan_um = j.at("res_bscan_um").get<double>();
  // Default fovea: lattice center.
  g.fovea_ix = j.value("fovea_ix", (g.width - 1) / 2.0);
  g.fovea_iy = j.value("fovea_iy", (g.n_bscans - 1) / 2.0);
  g.eye = parse_eye(j.value("eye", std::string("right")));
}

void to_json(json& j, const DefectSpec& d) {
  j = {{"center_mm", {d.center_x_mm, d.center_y_mm}},
       {"radius_mm", d.radius_mm},
       {"layer", d.layer},
       {"delta_um", d.delta_um}};
}

void from_json(const json& j, DefectSpec& d) {
  const auto& c = j.at("center_mm");
  d.center_x_mm = c.at(0).get<double>();
  d.center_y_mm = c.at(1).get<double>();
  d.radius_mm = j.at("radius_mm").get<double>();
  d.layer = j.at("layer").get<int>();
  d.delta_um = j.at("delta_um").get<double>();
}

void to_json(json& j, const CohortSpec& s) {
  j = {{"n_datasets", s.n_datasets},
       {"geometry", s.geometry},
       {"layer_names", s.layer_names},
       {"base_thickness_um", s.base_thickness_um},
       {"top_um", s.top_um},
       {"base_surface_amplitude_um", s.base_surface_amplitude_um},
       {"undulation_amplitude_um", s.undulation_amplitude_um},
       {"undulation_wavelength_mm", s.undulation_wavelength_mm},
       {"noise_sd_um", s.noise_sd_um},
       {"defects", s.defects},
       {"id_prefix", s.id_prefix},
       {"group_label", s.group_label},
       {"with_volume", s.with_volume}};
}

void from_json(const json& j, CohortSpec& s) {
  s = CohortSpec{};
  s.n_datasets = j.at("n_datasets").get<int>();
  s.geometry = j.at("geometry").get<AcquisitionGeometry>();
  if (j.contains("layer_names")) s.layer_names = j["layer_names"].get<std::vector<std::string>>();
  s.base_thickness_um = j.contains("base_thickness_um")
                            ? j["base_thickness_um"].get<std::vector<double>>()
                            : typical_layer_thickness_um();
  s.top_um = j.value("top_um", s.top_um);
  s.base_surface_amplitude_um = j.value("base_surface_amplitude_um", 0.0);
  s.undulation_amplitude_um = j.value("undulation_amplitude_um", 0.0);
  s.undulation_wavelength_mm = j.value("undulation_wavelength_mm", s.undulation_wavelength_mm);
  s.noise_sd_um = j.value("noise_sd_um", 0.0);
  if (j.contains("defects")) s.defects = j["defects"].get<std::vector<DefectSpec>>();
  s.id_prefix = j.value("id_prefix", s.id_prefix);
  s.group_label = j.value("group_label", std::string());
  s.with_volume = j.value("with_volume", false);
}

}  // namespace octlayers
