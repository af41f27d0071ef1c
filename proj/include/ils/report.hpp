// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/optimizer.hpp"
#include "ils/scene.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ils {

/// Provenance line carried by every artifact: tool version + input hash.
struct ArtifactStamp {
  std::string input_hash;

  std::string line(std::string_view comment_prefix) const;
};

/// Shortest decimal text that parses back to the same double.
std::string format_exact(double v);
std::string format_fixed(double v, int decimals);

struct IlluminationRecord {
  int patch_id = 0;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double area = 0.0;
  double exitance = 0.0;  // lm/m^2
  double incident = 0.0;  // lux
};

std::vector<IlluminationRecord> illumination_map(const Scene& scene, const Eigen::VectorXd& exitance,
                                                 const Eigen::VectorXd& incident);

enum class MapFormat { csv, mesh };
MapFormat parse_map_format(std::string_view text);

/// csv: one row per patch. mesh: ASCII PLY, 4 vertices and one quad per
/// patch, per-vertex scalar `lux` (incident illuminance).
std::string export_map(const std::vector<IlluminationRecord>& map, const Scene& scene, MapFormat format,
                       const ArtifactStamp& stamp);
std::vector<IlluminationRecord> parse_map_csv(std::string_view text);

/// Per-sensor estimate vs ground truth.
std::string sensor_table_csv(const Scene& scene, const ScenarioResult& result,
                             const std::map<int, double>& ground_truth, const ArtifactStamp& stamp);
std::string sensor_table_text(const Scene& scene, const ScenarioResult& result, const ArtifactStamp& stamp);

/// Per-scenario occupant drop, mean gaze-sensor error and saved power.
struct NamedScenario {
  std::string name;
  ScenarioResult result;
};
std::string scenario_table_csv(const Scene& scene, const std::vector<NamedScenario>& rows,
                               const ArtifactStamp& stamp);
std::string scenario_table_text(const Scene& scene, const std::vector<NamedScenario>& rows,
                                const ArtifactStamp& stamp);

std::string dims_to_string(std::span<const double> dims);

/// Writes through a temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ils
