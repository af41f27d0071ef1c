// SPDX-License-Identifier: Apache-2.0
#include "ils/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace ils {

namespace {

constexpr double kUnitTol = 1e-9;

bool finite(const Vec3& v) { return v.allFinite(); }

bool unit(const Vec3& v) { return finite(v) && std::abs(v.norm() - 1.0) <= kUnitTol; }

template <class T>
void check_unique_ids(const std::vector<T>& items, const char* what) {
  std::set<int> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      throw InvariantError(std::string("duplicate ") + what + " id " + std::to_string(item.id));
    }
  }
}

// Unit vector orthogonal to n, as close as possible to hint.
Vec3 orthogonal_to(const Vec3& n, const Vec3& hint) {
  Vec3 u = hint - hint.dot(n) * n;
  if (u.norm() < 1e-6) {
    const Vec3 alt = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    u = alt - alt.dot(n) * n;
  }
  return u.normalized();
}

}  // namespace

Patch Patch::make(int id, const Vec3& center, const Vec3& normal, const Vec3& u_hint,
                  Vec2 half_extents, double albedo) {
  Patch p;
  p.id = id;
  p.center = center;
  p.normal = normal.normalized();
  p.tangent_u = orthogonal_to(p.normal, u_hint);
  p.tangent_v = p.normal.cross(p.tangent_u);
  p.half_extents = half_extents;
  p.albedo = albedo;
  return p;
}

void Patch::validate() const {
  const std::string who = "patch " + std::to_string(id);
  if (!finite(center)) throw InvariantError(who + ": non-finite center");
  if (!unit(normal)) throw InvariantError(who + ": normal is not unit length");
  if (!unit(tangent_u) || !unit(tangent_v)) throw InvariantError(who + ": tangent is not unit length");
  if (std::abs(tangent_u.dot(normal)) > kUnitTol || std::abs(tangent_v.dot(normal)) > kUnitTol ||
      std::abs(tangent_u.dot(tangent_v)) > kUnitTol) {
    throw InvariantError(who + ": tangent basis not orthonormal to the normal");
  }
  if (!(half_extents.x() > 0.0 && half_extents.y() > 0.0) || !half_extents.allFinite()) {
    throw InvariantError(who + ": half extents must be positive");
  }
  if (!(albedo >= 0.0 && albedo < 1.0)) {
    throw InvariantError(who + ": albedo " + std::to_string(albedo) + " outside [0, 1)");
  }
}

double Luminaire::intensity_toward(const Vec3& target) const {
  const Vec3 world_dir = (target - position).normalized();
  return eval_ldc(ldc, orientation.transpose() * world_dir);
}

void Luminaire::validate() const {
  const std::string who = "luminaire " + std::to_string(id);
  if (!finite(position)) throw InvariantError(who + ": non-finite position");
  const Mat3 should_be_identity = orientation.transpose() * orientation;
  if (!orientation.allFinite() || !should_be_identity.isIdentity(1e-9) ||
      orientation.determinant() < 0.0) {
    throw InvariantError(who + ": orientation is not a rotation");
  }
  if (!(power_watts >= 0.0) || !std::isfinite(power_watts)) {
    throw InvariantError(who + ": negative power");
  }
  if (!(dim >= 0.0 && dim <= 1.0)) throw InvariantError(who + ": dim outside [0, 1]");
  try {
    ldc.validate();
  } catch (const InvariantError& e) {
    throw InvariantError(who + ": " + e.what());
  }
}

void Sensor::validate() const {
  const std::string who = "sensor " + std::to_string(id);
  if (!finite(position)) throw InvariantError(who + ": non-finite position");
  if (!unit(facing)) throw InvariantError(who + ": facing is not unit length");
  try {
    lsc.validate();
  } catch (const InvariantError& e) {
    throw InvariantError(who + ": " + e.what());
  }
}

void Occupant::validate() const {
  const std::string who = "occupant " + std::to_string(id);
  if (!finite(head_position)) throw InvariantError(who + ": non-finite head position");
  if (!unit(gaze)) throw InvariantError(who + ": gaze is not unit length");
  if (!(vfoa_aperture_deg > 0.0 && vfoa_aperture_deg < 180.0)) {
    throw InvariantError(who + ": aperture must lie in (0, 180)");
  }
  try {
    lsc.validate();
  } catch (const InvariantError& e) {
    throw InvariantError(who + ": " + e.what());
  }
}

Vec3 Camera::back_project(double u, double v, double depth_m) const {
  const Vec3 local((u - cx) * depth_m / fx, (v - cy) * depth_m / fy, depth_m);
  return rotation * local + position;
}

Vec3 Camera::project(const Vec3& world) const {
  const Vec3 local = rotation.transpose() * (world - position);
  return {fx * local.x() / local.z() + cx, fy * local.y() / local.z() + cy, local.z()};
}

void Camera::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw InvariantError("camera: focal lengths must be positive");
  if (width < 0 || height < 0) throw InvariantError("camera: negative image size");
  if (!rotation.allFinite() || !(rotation.transpose() * rotation).isIdentity(1e-9)) {
    throw InvariantError("camera: rotation is not orthonormal");
  }
  if (!finite(position)) throw InvariantError("camera: non-finite position");
}

std::vector<double> Scene::dims() const {
  std::vector<double> d;
  d.reserve(luminaires.size());
  for (const auto& l : luminaires) d.push_back(l.dim);
  return d;
}

std::vector<double> Scene::powers() const {
  std::vector<double> p;
  p.reserve(luminaires.size());
  for (const auto& l : luminaires) p.push_back(l.power_watts);
  return p;
}

void Scene::validate() const {
  check_unique_ids(patches, "patch");
  check_unique_ids(luminaires, "luminaire");
  check_unique_ids(sensors, "sensor");
  check_unique_ids(occupants, "occupant");
  for (const auto& p : patches) p.validate();
  for (const auto& l : luminaires) l.validate();
  for (const auto& s : sensors) s.validate();
  for (const auto& o : occupants) o.validate();
  camera.validate();
  if (!unit(world_up)) throw InvariantError("world_up is not unit length");
}

void DepthImage::validate() const {
  if (width <= 0 || height <= 0) throw InvariantError("depth image: non-positive size");
  if (depth.size() != static_cast<std::size_t>(width) * height) {
    throw InvariantError("depth image: pixel count does not match size");
  }
  for (double d : depth) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvariantError("depth image: negative or non-finite depth");
  }
}

int next_patch_id(const std::vector<Patch>& patches) {
  int next = 0;
  for (const auto& p : patches) next = std::max(next, p.id + 1);
  return next;
}

Scene with_occupant_bodies(const Scene& scene, const BodyOptions& opts) {
  Scene out = scene;
  if (opts.radius <= 0.0) return out;

  const Vec3 up = scene.world_up;
  const Vec3 ex = orthogonal_to(up, Vec3::UnitX());
  const Vec3 ey = up.cross(ex);
  const double r = opts.radius;
  int id = next_patch_id(out.patches);

  for (const auto& occ : scene.occupants) {
    const double head_h = occ.head_position.dot(up);
    const double bottom = opts.floor_height + opts.floor_clearance;
    const double top = head_h - opts.head_clearance;
    if (top <= bottom) continue;
    const Vec3 base = occ.head_position - head_h * up;  // foot of the head on the h = 0 plane
    const double half_h = 0.5 * (top - bottom);
    const Vec3 mid = base + (bottom + half_h) * up;

    out.patches.push_back(Patch::make(id++, base + top * up, up, ex, {r, r}, opts.albedo));
    out.patches.push_back(Patch::make(id++, base + bottom * up, -up, ex, {r, r}, opts.albedo));
    for (const Vec3& side : {ex, Vec3(-ex), ey, Vec3(-ey)}) {
      out.patches.push_back(Patch::make(id++, mid + r * side, side, up, {half_h, r}, opts.albedo));
    }
  }
  return out;
}

}  // namespace ils
