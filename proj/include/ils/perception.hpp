// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/accel.hpp"
#include "ils/radiosity.hpp"
#include "ils/scene.hpp"

#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace ils {

/// One detected person in one frame, as produced by an upstream detector and
/// head-pose classifier.
struct DetectionRecord {
  int frame_id = 0;
  int person_id = 0;
  std::array<double, 4> bbox{};  // x, y, w, h in pixels
  Vec2 head_px = Vec2::Zero();
  int pose_class = 0;
  int classes = 8;  // K

  bool operator==(const DetectionRecord&) const = default;
};

/// Parses line-delimited JSON records. When `image_size` is given, boxes and
/// head points are checked against it. Result is stably sorted by frame.
std::vector<DetectionRecord> ingest_detections(std::string_view stream,
                                               std::optional<std::pair<int, int>> image_size = {});

/// World position of the detected head: median valid depth in a 5x5 window
/// around the head pixel, back-projected through the camera.
Vec3 head_to_3d(const DetectionRecord& record, const DepthImage& depth, const Camera& camera);

/// Horizontal gaze for a head-pose class: azimuth class * 360/K from the
/// world +X axis projected on the ground plane.
Vec3 gaze_from_class(int pose_class, int classes, const Vec3& world_up);

/// Occupants for one frame of detections (occupant id = person id).
std::vector<Occupant> occupants_from_detections(std::span<const DetectionRecord> records, int frame_id,
                                                const DepthImage& depth, const Camera& camera,
                                                const Vec3& world_up, const LuxmeterSensitivityCurve& lsc,
                                                double aperture_deg = 30.0);

/// Visual frustum of attention: an unbounded cone at the head.
struct Vfoa {
  Vec3 apex = Vec3::Zero();
  Vec3 axis = Vec3::UnitX();
  double aperture_deg = 30.0;

  bool contains_direction(const Vec3& dir) const;
};

struct PerceivedLux {
  double total = 0.0;
  double patch_term = 0.0;
  double direct_term = 0.0;
  std::size_t n_rays = 0;
};

struct SensorPose {
  Vec3 position = Vec3::Zero();
  Vec3 facing = Vec3::UnitZ();
};

/// n points uniformly covering the unit hemisphere around +Z (spherical
/// Fibonacci lattice restricted to z > 0). Deterministic in n.
std::vector<Vec3> hemisphere_lattice(std::size_t n);

/// Ray-traced footprint of a luxmeter: which patch each lattice ray sees and
/// with what weight, plus per-luminaire direct terms at dim 1. Readings for
/// any exitance field reuse the same rays, so they are exactly linear.
class LuxmeterProbe {
 public:
  LuxmeterProbe(const Scene& scene, const AccelIndex& accel, const SensorPose& pose,
                const LuxmeterSensitivityCurve& lsc, std::size_t n_rays, bool include_direct = true);

  /// Reading for a given exitance field (indexed like the accel's patches)
  /// and the dim vector that produced it.
  PerceivedLux read(const Eigen::VectorXd& exitance, std::span<const double> dims) const;

  double direct_unit(std::size_t luminaire) const { return direct_unit_[luminaire]; }
  std::size_t n_rays() const { return n_rays_; }

 private:
  struct Sample {
    std::uint32_t patch_index;
    double weight;  // lsc(theta) * (2 pi / n) / pi
  };
  std::vector<Sample> samples_;
  std::vector<double> direct_unit_;
  std::size_t n_rays_;
};

PerceivedLux virtual_luxmeter(const Scene& scene, const LuminaireBasis& basis, const SensorPose& pose,
                              const LuxmeterSensitivityCurve& lsc, std::span<const double> dims,
                              const AccelIndex& accel, std::size_t n_rays, bool include_direct = true);

PerceivedLux virtual_luxmeter(const Scene& scene, const Eigen::VectorXd& exitance, const SensorPose& pose,
                              const LuxmeterSensitivityCurve& lsc, std::span<const double> dims,
                              const AccelIndex& accel, std::size_t n_rays, bool include_direct = true);

/// Ids of luminaires inside the occupant's VFOA and visible from the head.
std::set<int> vfoa_visible_luminaires(const Occupant& occupant, const Scene& scene, const AccelIndex& accel);

}  // namespace ils
