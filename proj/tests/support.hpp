// SPDX-License-Identifier: Apache-2.0
// Shared fixtures and brute-force oracles for the test binaries.
#pragma once

#include "ils/accel.hpp"
#include "ils/optimizer.hpp"
#include "ils/radiosity.hpp"
#include "ils/scene.hpp"
#include "ils/scene_io.hpp"

#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace ils::test {

inline const std::filesystem::path kRoom8Dir = ILS_ROOM8_DIR;

inline Scene load_room8() { return load_scene_file(kRoom8Dir / "scene.json"); }

inline Patch square(int id, const Vec3& center, const Vec3& normal, double side, double albedo = 0.5) {
  const Vec3 hint = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return Patch::make(id, center, normal.normalized(), hint, {0.5 * side, 0.5 * side}, albedo);
}

inline Patch rect(int id, const Vec3& center, const Vec3& normal, const Vec3& u_hint, double w, double h,
                  double albedo) {
  return Patch::make(id, center, normal.normalized(), u_hint, {0.5 * w, 0.5 * h}, albedo);
}

// Inward-facing box [0, sx] x [0, sy] x [0, sz] tiled with `cell`-sized patches.
inline std::vector<Patch> closed_box(double sx, double sy, double sz, double cell, double albedo, int first_id = 0) {
  std::vector<Patch> out;
  int id = first_id;
  const double size[3] = {sx, sy, sz};
  for (int axis = 0; axis < 3; ++axis) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    const int na = static_cast<int>(std::lround(size[a] / cell));
    const int nb = static_cast<int>(std::lround(size[b] / cell));
    const double ca = size[a] / na, cb = size[b] / nb;
    for (int side = 0; side < 2; ++side) {
      Vec3 n = Vec3::Zero();
      n[axis] = side == 0 ? 1.0 : -1.0;
      for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
          Vec3 c;
          c[axis] = side == 0 ? 0.0 : size[axis];
          c[a] = (i + 0.5) * ca;
          c[b] = (j + 0.5) * cb;
          Vec3 u = Vec3::Zero();
          u[a] = 1.0;
          out.push_back(rect(id++, c, n, u, ca, cb, albedo));
        }
      }
    }
  }
  return out;
}

inline Luminaire point_light(int id, const Vec3& pos, double candela, double watts = 10.0) {
  Luminaire l;
  l.id = id;
  l.position = pos;
  l.ldc = LightDistributionCurve::constant(candela, "point" + std::to_string(id));
  l.power_watts = watts;
  return l;
}

// Nearest hit by scanning every patch; ties in t go to the lowest id.
inline std::optional<Hit> linear_cast(const std::vector<Patch>& patches, const Ray& ray, double eps) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : patches) {
    if (auto t = intersect_patch(p, ray, eps); t && *t < best) best = *t;
  }
  if (!std::isfinite(best)) return std::nullopt;
  std::optional<Hit> hit;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    auto t = intersect_patch(patches[i], ray, eps);
    if (t && *t <= best + kHitTieEpsilon && (!hit || patches[i].id < hit->patch_id)) {
      hit = Hit{patches[i].id, i, *t, ray.origin + *t * ray.direction};
    }
  }
  return hit;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v;
  do {
    v = {g(rng), g(rng), g(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

// Small box room with ceiling point lights and occupants at head height.
struct RandomRoom {
  Scene scene;
  double delta_max = 200.0;
};

inline RandomRoom random_room(std::uint64_t seed, std::size_t max_luminaires = 8, std::size_t max_occupants = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  RandomRoom room;
  Scene& s = room.scene;
  const double sx = 3.0, sy = 2.0, sz = 2.5;
  s.patches = closed_box(sx, sy, sz, 0.5, 0.5);
  for (auto& p : s.patches) p.albedo = uniform(0.1, 0.8);

  const std::size_t n_lum = pick(1, max_luminaires);
  for (std::size_t l = 0; l < n_lum; ++l) {
    Luminaire lum = point_light(static_cast<int>(l) + 1, {uniform(0.3, sx - 0.3), uniform(0.3, sy - 0.3), sz - 0.05},
                                uniform(100.0, 600.0));
    // A few shared wattages so equal-power ties actually occur.
    const double watts[] = {20.0, 40.0, 40.0, 60.0, uniform(10.0, 90.0)};
    lum.power_watts = watts[pick(0, 4)];
    s.luminaires.push_back(std::move(lum));
  }

  const std::size_t n_occ = pick(1, max_occupants);
  for (std::size_t k = 0; k < n_occ; ++k) {
    Occupant o;
    o.id = static_cast<int>(k) + 1;
    o.head_position = {uniform(0.4, sx - 0.4), uniform(0.4, sy - 0.4), uniform(1.0, 1.7)};
    const double az = uniform(0.0, 2.0 * kPi);
    o.gaze = {std::cos(az), std::sin(az), 0.0};
    o.lsc = LuxmeterSensitivityCurve::cosine();
    s.occupants.push_back(o);
  }
  room.delta_max = uniform(20.0, 300.0);
  s.validate();
  return room;
}

// Minimum-power on/off vector by full enumeration; ties go to the lexicographically
// smallest vector in luminaire-id order (earliest luminaire off).
inline std::optional<std::vector<double>> brute_force_binary(const Eigen::MatrixXd& A, std::span<const double> powers,
                                                             double delta_max) {
  const std::size_t n = powers.size();
  std::optional<std::vector<double>> best;
  double best_power = std::numeric_limits<double>::infinity();
  const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
  std::vector<std::vector<double>> candidates;
  std::vector<double> cand_power;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<double> d(n);
    double p = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      d[l] = (mask >> l) & 1u ? 1.0 : 0.0;
      p += powers[l] * d[l];
    }
    bool ok = true;
    for (Eigen::Index k = 0; k < A.rows() && ok; ++k) {
      double drop = 0.0;
      for (std::size_t l = 0; l < n; ++l) drop += A(k, static_cast<Eigen::Index>(l)) * (1.0 - d[l]);
      ok = drop <= delta_max + 1e-9;
    }
    if (!ok) continue;
    candidates.push_back(d);
    cand_power.push_back(p);
    best_power = std::min(best_power, p);
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (cand_power[i] > best_power + 1e-9 * std::max(1.0, total)) continue;
    if (!best || candidates[i] < *best) best = candidates[i];
  }
  return best;
}

}  // namespace ils::test
