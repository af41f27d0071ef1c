// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/common.hpp"
#include "ils/photometry.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace ils {

inline constexpr double kMaxAlbedo = 1.0 - 1e-3;

/// Oriented rectangle; the radiosity unknown lives on each patch.
struct Patch {
  int id = 0;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 tangent_u = Vec3::UnitX();
  Vec3 tangent_v = Vec3::UnitY();
  Vec2 half_extents = Vec2(0.125, 0.125);
  double albedo = 0.5;

  double area() const { return 4.0 * half_extents.x() * half_extents.y(); }
  /// Point at local coordinates (s, t) in [-1, 1]^2.
  Vec3 at(double s, double t) const {
    return center + s * half_extents.x() * tangent_u + t * half_extents.y() * tangent_v;
  }
  std::array<Vec3, 4> corners() const {
    return {at(-1, -1), at(1, -1), at(1, 1), at(-1, 1)};
  }

  /// Builds a patch from a normal and a preferred in-plane direction.
  static Patch make(int id, const Vec3& center, const Vec3& normal, const Vec3& u_hint,
                    Vec2 half_extents, double albedo);

  void validate() const;
  bool operator==(const Patch&) const = default;
};

struct Luminaire {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();  // luminaire frame -> world
  LightDistributionCurve ldc;
  double power_watts = 0.0;
  double dim = 1.0;

  /// Intensity toward a world-space point at dim 1.
  double intensity_toward(const Vec3& target) const;

  void validate() const;
  bool operator==(const Luminaire&) const = default;
};

enum class SensorRole : std::uint8_t { spatial, gaze };

struct Sensor {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 facing = Vec3::UnitZ();
  LuxmeterSensitivityCurve lsc;
  SensorRole role = SensorRole::spatial;

  void validate() const;
  bool operator==(const Sensor&) const = default;
};

struct Occupant {
  int id = 0;
  Vec3 head_position = Vec3::Zero();
  Vec3 gaze = Vec3::UnitX();
  double vfoa_aperture_deg = 30.0;
  LuxmeterSensitivityCurve lsc;

  void validate() const;
  bool operator==(const Occupant&) const = default;
};

/// Pinhole intrinsics plus the camera -> world pose. Camera looks along +Z
/// of its own frame, +X right, +Y down (image convention).
struct Camera {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  Vec3 back_project(double u, double v, double depth_m) const;
  /// Pixel coordinates and camera-frame depth of a world point.
  Vec3 project(const Vec3& world) const;

  void validate() const;
  bool operator==(const Camera&) const = default;
};

struct Scene {
  std::vector<Patch> patches;
  std::vector<Luminaire> luminaires;
  std::vector<Sensor> sensors;
  std::vector<Occupant> occupants;
  Camera camera;
  Vec3 world_up = Vec3::UnitZ();

  std::vector<double> dims() const;
  std::vector<double> powers() const;

  void validate() const;
  bool operator==(const Scene&) const = default;
};

/// Per-pixel depth in meters; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  void validate() const;
};

/// Single-channel intensity image (radiance units) for albedo estimation.
struct IntensityImage {
  int width = 0;
  int height = 0;
  std::vector<double> value;

  double at(int u, int v) const { return value[static_cast<std::size_t>(v) * width + u]; }
};

struct BodyOptions {
  double radius = 0.20;
  double floor_height = 0.0;
  double floor_clearance = 0.10;
  double head_clearance = 0.15;
  double albedo = 0.3;
};

/// Appends six occluder patches per occupant: a box of half-width `radius`
/// from `floor_clearance` above the floor up to `head_clearance` below the
/// head.
Scene with_occupant_bodies(const Scene& scene, const BodyOptions& opts = {});

/// Lowest unused patch id (max id + 1, or 0 when empty).
int next_patch_id(const std::vector<Patch>& patches);

}  // namespace ils
