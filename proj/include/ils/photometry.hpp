// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/common.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ils {

/// Luminous intensity table of a luminaire (Type C goniometry).
///
/// Directions are expressed in the luminaire frame: the polar angle gamma is
/// measured from the local -Z axis (nadir, gamma = 0) and the azimuth plane C
/// from local +X toward +Y. `candela[c][g]` is the intensity on azimuth plane
/// `azimuth_deg[c]` at polar angle `polar_deg[g]`.
struct LightDistributionCurve {
  std::string name;
  std::vector<double> polar_deg;
  std::vector<double> azimuth_deg;
  std::vector<std::vector<double>> candela;

  /// Constant-intensity table emitting `flux_lm` lumens over the full sphere.
  static LightDistributionCurve isotropic(double flux_lm, std::string name = "isotropic");
  static LightDistributionCurve constant(double candela, std::string name = "constant");

  /// Throws InvariantError on any broken table invariant.
  void validate() const;

  bool operator==(const LightDistributionCurve&) const = default;
};

/// Intensity in candela toward `direction` (unit, luminaire frame).
double eval_ldc(const LightDistributionCurve& ldc, const Vec3& direction);

/// Same lookup addressed by angles; azimuth is wrapped into [0, 360).
double eval_ldc_angles(const LightDistributionCurve& ldc, double azimuth_deg, double polar_deg);

/// Relative angular response of a luxmeter head, 1 at normal incidence.
struct LuxmeterSensitivityCurve {
  std::string name;
  std::vector<double> angles_deg;
  std::vector<double> weight;

  /// Ideal cosine response sampled every `step_deg` degrees over [0, 90].
  static LuxmeterSensitivityCurve cosine(double step_deg = 5.0, std::string name = "cosine");

  void validate() const;

  bool operator==(const LuxmeterSensitivityCurve&) const = default;
};

/// Weight for light arriving `incidence_deg` away from the sensor axis.
double eval_lsc(const LuxmeterSensitivityCurve& lsc, double incidence_deg);

// CSV codecs. LDC: header row of polar angles (first cell is a label), then
// one row per azimuth plane. LSC: two columns angle_deg,weight.
LightDistributionCurve parse_ldc_csv(std::string_view text, std::string name);
std::string format_ldc_csv(const LightDistributionCurve& ldc);
LuxmeterSensitivityCurve parse_lsc_csv(std::string_view text, std::string name);
std::string format_lsc_csv(const LuxmeterSensitivityCurve& lsc);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace ils
