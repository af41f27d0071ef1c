// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/scene.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace ils {

inline constexpr int kSceneSchemaVersion = 1;

/// Parses a scene document (JSON). Relative table file references resolve
/// against `base_dir`. Throws ParseError (with line or field path) or
/// InvariantError (naming the offending entity).
Scene load_scene(std::string_view document, const std::filesystem::path& base_dir = {});
Scene load_scene_file(const std::filesystem::path& path);

/// Serializes with every table inlined, so load_scene(save_scene(s)) == s.
std::string save_scene(const Scene& scene);

/// 16-bit binary PGM (P5) holding depth in millimeters.
DepthImage read_depth_pgm(const std::filesystem::path& path, double meters_per_unit = 1e-3);
std::string encode_depth_pgm(const DepthImage& depth, double meters_per_unit = 1e-3);

/// Intrinsics sidecar: {"fx","fy","cx","cy","width","height",
/// "rotation" (optional 3x3), "position" (optional), "depth_scale_m"}.
struct DepthSidecar {
  Camera camera;
  double depth_scale_m = 1e-3;
};
DepthSidecar parse_depth_sidecar(std::string_view document);

}  // namespace ils
