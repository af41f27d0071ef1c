// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/optimizer.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ils {

enum class Command { patchify, solve, simulate, optimize, evaluate, export_map };

struct RunConfig {
  Command command = Command::solve;
  std::filesystem::path scene_path;
  std::filesystem::path detections_path;
  std::filesystem::path ground_truth_path;
  std::filesystem::path depth_path;
  std::filesystem::path intrinsics_path;
  std::filesystem::path output_dir = "out";
  std::filesystem::path ff_cache;
  double patch_size = 0.25;
  int ff_samples = 16;
  bool ff_occlusion = true;
  std::size_t n_rays = 10000;
  double delta_max = 200.0;
  IlsMode mode = IlsMode::binary;
  unsigned threads = 0;  // 0: hardware concurrency
  std::string format = "csv";
  double body_radius = 0.20;  // 0 disables occupant bodies
  std::optional<int> frame;
  std::vector<double> dims;   // overrides the scene's dim vector when set
  std::optional<double> spatial_floor;
  double overhead_watts = 65.0;
  double hours = 24.0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitInfeasible = 4;

/// Runs one command and writes its artifacts. Errors are reported on `err`
/// and mapped to the exit codes above.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses command-line arguments (and an optional --config file) and runs.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ils
