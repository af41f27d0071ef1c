// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/perception.hpp"
#include "ils/radiosity.hpp"
#include "ils/scene.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ils {

/// A[k][l]: lux perceived by occupant k from luminaire l alone at dim 1.
struct ContributionMatrix {
  Eigen::MatrixXd A;
  Eigen::VectorXd full_lit;
  std::vector<int> row_ids;  // occupant or sensor id per row

  /// Drop of each row's reading at `dims` relative to full-lit.
  Eigen::VectorXd drop(std::span<const double> dims) const;
};

enum class IlsMode { binary, continuous, vfoa_gated };

IlsMode parse_mode(std::string_view text);
std::string_view mode_name(IlsMode mode);

struct IlsConfig {
  double delta_max_lux = 200.0;
  IlsMode mode = IlsMode::binary;
  double overhead_watts = 65.0;
  /// Optional floor on spatial-sensor readings (off when unset).
  std::optional<double> spatial_floor_lux;
};

/// Readings of arbitrary probes sharing one ray sequence per probe.
ContributionMatrix probe_contributions(const Scene& scene, const LuminaireBasis& basis,
                                       const AccelIndex& accel, std::span<const SensorPose> poses,
                                       std::span<const LuxmeterSensitivityCurve> lscs, std::size_t n_rays);

ContributionMatrix contribution_matrix(const Scene& scene, const LuminaireBasis& basis,
                                       const AccelIndex& accel, std::size_t n_rays);
ContributionMatrix sensor_contribution_matrix(const Scene& scene, const LuminaireBasis& basis,
                                              const AccelIndex& accel, std::size_t n_rays,
                                              std::optional<SensorRole> role = {});

/// Inputs the optimizer needs beyond the occupant matrix.
struct OptimizeContext {
  /// vfoa_gated: luminaire indices inside at least one occupant's VFOA.
  std::vector<bool> in_vfoa;
  /// Spatial floor constraint rows (required when cfg.spatial_floor_lux is set).
  const ContributionMatrix* spatial = nullptr;
  /// Luminaire ids, for tie-breaking and messages (defaults to 0..L-1).
  std::vector<int> luminaire_ids;
};

struct Optimum {
  std::vector<double> dims;
  double power_watts = 0.0;
};

/// Minimum-power dim vector keeping every occupant's drop within budget.
/// Ties (equal power) prefer switching off lower-id luminaires.
Optimum optimize(const ContributionMatrix& occupants, std::span<const double> powers, const IlsConfig& cfg,
                 const OptimizeContext& ctx = {});

/// Convenience: VFOA membership mask for all occupants of the scene.
std::vector<bool> vfoa_mask(const Scene& scene, const AccelIndex& accel);

/// Maximizes c.x subject to M x <= b, x >= 0, with b >= 0 (dense simplex,
/// Bland's rule). Returns the optimal x.
std::vector<double> simplex_max(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

struct EnergyReport {
  double baseline_wh = 0.0;
  double ils_wh = 0.0;
  double delta_watt = 0.0;
  double saving_fraction = 0.0;
  double hours = 24.0;
};

EnergyReport energy_report(std::span<const double> dims, std::span<const double> powers, double hours,
                           const IlsConfig& cfg);

struct ScenarioResult {
  std::vector<double> dims;
  std::map<int, double> sensor_lux;     // estimate per sensor id
  std::map<int, double> epsilon_est;    // |estimate - truth| per sensor with ground truth
  std::map<int, double> occupant_lux;   // perceived per occupant id
  std::map<int, double> delta_lux;      // full-lit minus current, per occupant id
  double delta_watt = 0.0;
  EnergyReport energy;
};

ScenarioResult evaluate_scenario(const Scene& scene, const LuminaireBasis& basis, std::span<const double> dims,
                                 const std::map<int, double>& ground_truth, const AccelIndex& accel,
                                 std::size_t n_rays, const IlsConfig& cfg);

/// Ground-truth CSV: sensor_id,lux (header optional).
std::map<int, double> parse_ground_truth_csv(std::string_view text);

}  // namespace ils
