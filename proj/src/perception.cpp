// SPDX-License-Identifier: Apache-2.0
#include "ils/perception.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace ils {

namespace {

// Orthonormal frame (u, v, w) with w = axis.
std::pair<Vec3, Vec3> frame_around(const Vec3& w) {
  const Vec3 helper = std::abs(w.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = helper.cross(w).normalized();
  return {u, w.cross(u)};
}

}  // namespace

std::vector<DetectionRecord> ingest_detections(std::string_view stream,
                                               std::optional<std::pair<int, int>> image_size) {
  std::vector<DetectionRecord> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start < stream.size()) {
    auto nl = stream.find('\n', start);
    if (nl == std::string_view::npos) nl = stream.size();
    const auto line = stream.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = "detections line " + std::to_string(line_no);
    DetectionRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.frame_id = j.at("frame_id").get<int>();
      r.person_id = j.at("person_id").get<int>();
      const auto& bbox = j.at("bbox");
      const auto& head = j.at("head_px");
      if (bbox.size() != 4 || head.size() != 2) throw ParseError("bbox needs 4 and head_px 2 numbers");
      for (std::size_t k = 0; k < 4; ++k) r.bbox[k] = bbox.at(k).get<double>();
      r.head_px = {head.at(0).get<double>(), head.at(1).get<double>()};
      r.pose_class = j.at("pose_class").get<int>();
      r.classes = j.at("K").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }

    if (r.classes != 4 && r.classes != 8) {
      throw ParseError(where + ": K must be 4 or 8, got " + std::to_string(r.classes));
    }
    if (r.pose_class < 0 || r.pose_class >= r.classes) {
      throw ParseError(where + ": pose_class " + std::to_string(r.pose_class) + " outside [0, " +
                       std::to_string(r.classes) + ")");
    }
    if (!(r.bbox[2] > 0.0 && r.bbox[3] > 0.0) || r.bbox[0] < 0.0 || r.bbox[1] < 0.0) {
      throw ParseError(where + ": bbox must have non-negative origin and positive size");
    }
    if (image_size) {
      const auto [w, h] = *image_size;
      if (r.bbox[0] + r.bbox[2] > w || r.bbox[1] + r.bbox[3] > h) {
        throw ParseError(where + ": bbox exceeds the image bounds");
      }
      if (r.head_px.x() < 0.0 || r.head_px.y() < 0.0 || r.head_px.x() >= w || r.head_px.y() >= h) {
        throw ParseError(where + ": head point outside the image");
      }
    }
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DetectionRecord& a, const DetectionRecord& b) { return a.frame_id < b.frame_id; });
  return out;
}

Vec3 head_to_3d(const DetectionRecord& record, const DepthImage& depth, const Camera& camera) {
  const auto u0 = static_cast<int>(std::lround(record.head_px.x()));
  const auto v0 = static_cast<int>(std::lround(record.head_px.y()));
  if (u0 < 0 || v0 < 0 || u0 >= depth.width || v0 >= depth.height) {
    throw InvariantError("person " + std::to_string(record.person_id) + ": head pixel outside the depth image");
  }
  std::vector<double> valid;
  for (int v = std::max(0, v0 - 2); v <= std::min(depth.height - 1, v0 + 2); ++v) {
    for (int u = std::max(0, u0 - 2); u <= std::min(depth.width - 1, u0 + 2); ++u) {
      if (const double d = depth.at(u, v); d > 0.0) valid.push_back(d);
    }
  }
  if (valid.empty()) {
    throw NumericError("person " + std::to_string(record.person_id) + " (frame " +
                       std::to_string(record.frame_id) + "): no valid depth around the head");
  }
  std::sort(valid.begin(), valid.end());
  const std::size_t m = valid.size() / 2;
  const double median = valid.size() % 2 == 1 ? valid[m] : 0.5 * (valid[m - 1] + valid[m]);
  return camera.back_project(record.head_px.x(), record.head_px.y(), median);
}

Vec3 gaze_from_class(int pose_class, int classes, const Vec3& world_up) {
  if (classes != 4 && classes != 8) throw InvariantError("head-pose class count must be 4 or 8");
  if (pose_class < 0 || pose_class >= classes) throw InvariantError("head-pose class out of range");
  const Vec3 up = world_up.normalized();
  Vec3 ex = Vec3::UnitX() - Vec3::UnitX().dot(up) * up;
  if (ex.norm() < 1e-6) ex = Vec3::UnitY() - Vec3::UnitY().dot(up) * up;
  ex.normalize();
  const Vec3 ey = up.cross(ex);
  const double azimuth = deg2rad(pose_class * (360.0 / classes));
  Vec3 g = std::cos(azimuth) * ex + std::sin(azimuth) * ey;
  g -= g.dot(up) * up;
  return g.normalized();
}

std::vector<Occupant> occupants_from_detections(std::span<const DetectionRecord> records, int frame_id,
                                                const DepthImage& depth, const Camera& camera,
                                                const Vec3& world_up, const LuxmeterSensitivityCurve& lsc,
                                                double aperture_deg) {
  std::vector<Occupant> out;
  for (const auto& r : records) {
    if (r.frame_id != frame_id) continue;
    Occupant o;
    o.id = r.person_id;
    o.head_position = head_to_3d(r, depth, camera);
    o.gaze = gaze_from_class(r.pose_class, r.classes, world_up);
    o.vfoa_aperture_deg = aperture_deg;
    o.lsc = lsc;
    o.validate();
    out.push_back(std::move(o));
  }
  return out;
}

bool Vfoa::contains_direction(const Vec3& dir) const {
  const double c = axis.dot(dir.normalized());
  return c >= std::cos(deg2rad(0.5 * aperture_deg));
}

std::vector<Vec3> hemisphere_lattice(std::size_t n) {
  static const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double frac = static_cast<double>(i) / golden;
    frac -= std::floor(frac);
    const double phi = 2.0 * kPi * frac;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

LuxmeterProbe::LuxmeterProbe(const Scene& scene, const AccelIndex& accel, const SensorPose& pose,
                             const LuxmeterSensitivityCurve& lsc, std::size_t n_rays, bool include_direct)
    : n_rays_(n_rays) {
  if (n_rays == 0) throw InvariantError("virtual luxmeter: n_rays must be >= 1");
  const Vec3 facing = pose.facing.normalized();
  const auto [tu, tv] = frame_around(facing);
  const double measure = 2.0 * kPi / static_cast<double>(n_rays);

  for (const Vec3& local : hemisphere_lattice(n_rays)) {
    const double w = eval_lsc(lsc, rad2deg(std::acos(std::clamp(local.z(), -1.0, 1.0))));
    if (w <= 0.0) continue;
    const Vec3 dir = (local.x() * tu + local.y() * tv + local.z() * facing).normalized();
    const auto hit = accel.cast_ray(Ray{pose.position, dir});
    if (!hit) continue;
    // Only the front face of a patch emits its exitance.
    if (accel.patches()[hit->index].normal.dot(dir) >= 0.0) continue;
    samples_.push_back({static_cast<std::uint32_t>(hit->index), w * measure / kPi});
  }

  direct_unit_.assign(scene.luminaires.size(), 0.0);
  if (!include_direct) return;
  for (std::size_t l = 0; l < scene.luminaires.size(); ++l) {
    const Luminaire& lum = scene.luminaires[l];
    const Vec3 to_light = lum.position - pose.position;
    const double r2 = to_light.squaredNorm();
    if (r2 <= 0.0) continue;
    const double cos_in = std::clamp(facing.dot(to_light) / std::sqrt(r2), -1.0, 1.0);
    const double w = eval_lsc(lsc, rad2deg(std::acos(cos_in)));
    if (w <= 0.0 || !accel.visible(lum.position, pose.position)) continue;
    direct_unit_[l] = w * lum.intensity_toward(pose.position) / r2;
  }
}

PerceivedLux LuxmeterProbe::read(const Eigen::VectorXd& exitance, std::span<const double> dims) const {
  if (dims.size() != direct_unit_.size()) throw InvariantError("virtual luxmeter: dim vector size mismatch");
  PerceivedLux out;
  out.n_rays = n_rays_;
  for (const auto& s : samples_) out.patch_term += s.weight * exitance[s.patch_index];
  for (std::size_t l = 0; l < dims.size(); ++l) out.direct_term += dims[l] * direct_unit_[l];
  out.total = out.patch_term + out.direct_term;
  return out;
}

PerceivedLux virtual_luxmeter(const Scene& scene, const LuminaireBasis& basis, const SensorPose& pose,
                              const LuxmeterSensitivityCurve& lsc, std::span<const double> dims,
                              const AccelIndex& accel, std::size_t n_rays, bool include_direct) {
  return virtual_luxmeter(scene, basis.combine_exitance(dims), pose, lsc, dims, accel, n_rays, include_direct);
}

PerceivedLux virtual_luxmeter(const Scene& scene, const Eigen::VectorXd& exitance, const SensorPose& pose,
                              const LuxmeterSensitivityCurve& lsc, std::span<const double> dims,
                              const AccelIndex& accel, std::size_t n_rays, bool include_direct) {
  if (static_cast<std::size_t>(exitance.size()) != accel.patches().size()) {
    throw InvariantError("virtual luxmeter: exitance field does not match the indexed patches");
  }
  return LuxmeterProbe(scene, accel, pose, lsc, n_rays, include_direct).read(exitance, dims);
}

std::set<int> vfoa_visible_luminaires(const Occupant& occupant, const Scene& scene, const AccelIndex& accel) {
  const Vfoa cone{occupant.head_position, occupant.gaze.normalized(), occupant.vfoa_aperture_deg};
  std::set<int> ids;
  for (const auto& lum : scene.luminaires) {
    const Vec3 dir = lum.position - occupant.head_position;
    if (dir.squaredNorm() <= 0.0) continue;
    if (cone.contains_direction(dir) && accel.visible(occupant.head_position, lum.position)) {
      ids.insert(lum.id);
    }
  }
  return ids;
}

}  // namespace ils
