// SPDX-License-Identifier: Apache-2.0
#include "ils/patchify.hpp"

#include "ils/parallel.hpp"
#include "ils/radiosity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace ils {

namespace {

struct Cell {
  std::vector<Vec3> points;
  double footprint_u = 0.0;  // accumulated pixel footprint (depth / fx)
  double footprint_v = 0.0;
};

std::optional<Patch> fit_cell(const Cell& cell, const Vec3& camera_pos, int id, double albedo) {
  const auto n = static_cast<double>(cell.points.size());
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cell.points) centroid += p;
  centroid /= n;
  Mat3 cov = Mat3::Zero();
  for (const auto& p : cell.points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // A single row or column of pixels does not pin down a plane.
  if (!(eig.eigenvalues()[1] > 1e-6 * eig.eigenvalues()[2])) return std::nullopt;
  Vec3 normal = eig.eigenvectors().col(0).normalized();
  const double facing = normal.dot(camera_pos - centroid);
  if (facing == 0.0) return std::nullopt;
  if (facing < 0.0) normal = -normal;

  const Patch frame = Patch::make(id, centroid, normal, Vec3::UnitX(), {1.0, 1.0}, albedo);
  double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
  double lo_v = lo_u, hi_v = -lo_u;
  for (const auto& p : cell.points) {
    const Vec3 d = p - centroid;
    lo_u = std::min(lo_u, d.dot(frame.tangent_u));
    hi_u = std::max(hi_u, d.dot(frame.tangent_u));
    lo_v = std::min(lo_v, d.dot(frame.tangent_v));
    hi_v = std::max(hi_v, d.dot(frame.tangent_v));
  }
  const double pitch_u = cell.footprint_u / n;
  const double pitch_v = cell.footprint_v / n;
  Patch patch = frame;
  patch.center = centroid + 0.5 * (lo_u + hi_u) * frame.tangent_u + 0.5 * (lo_v + hi_v) * frame.tangent_v;
  patch.half_extents = {0.5 * (hi_u - lo_u + pitch_u), 0.5 * (hi_v - lo_v + pitch_v)};
  return patch;
}

}  // namespace

std::vector<Patch> patchify_depth(const DepthImage& depth, const Camera& camera, const PatchifyOptions& opts) {
  if (!(opts.patch_size > 0.0)) throw InvariantError("patchify: patch_size must be > 0");
  if (!(camera.fx > 0.0 && camera.fy > 0.0)) throw InvariantError("patchify: focal lengths must be > 0");
  depth.validate();

  std::map<std::array<long, 3>, Cell> cells;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double z = depth.at(u, v);
      if (z <= 0.0) continue;
      const Vec3 p = camera.back_project(u, v, z);
      const std::array<long, 3> key{static_cast<long>(std::floor(p.x() / opts.patch_size)),
                                    static_cast<long>(std::floor(p.y() / opts.patch_size)),
                                    static_cast<long>(std::floor(p.z() / opts.patch_size))};
      Cell& cell = cells[key];
      cell.points.push_back(p);
      cell.footprint_u += z / camera.fx;
      cell.footprint_v += z / camera.fy;
    }
  }

  std::vector<const Cell*> kept;
  for (const auto& [key, cell] : cells) {
    if (static_cast<int>(cell.points.size()) >= opts.min_pixels) kept.push_back(&cell);
  }
  std::vector<std::optional<Patch>> fitted(kept.size());
  parallel_for(kept.size(), [&](std::size_t i) {
    fitted[i] = fit_cell(*kept[i], camera.position, 0, opts.default_albedo);
  });

  std::vector<Patch> patches;
  int id = opts.first_id;
  for (auto& f : fitted) {
    if (!f) continue;
    f->id = id++;
    patches.push_back(*f);
  }
  if (patches.empty()) {
    throw NumericError("patchify: no cell holds at least " + std::to_string(opts.min_pixels) + " valid pixels");
  }
  return patches;
}

std::vector<double> albedo_from_observations(const std::vector<std::vector<double>>& observed,
                                             const std::vector<std::vector<double>>& predicted,
                                             std::span<const int> patch_ids, const AlbedoOptions& opts) {
  if (observed.empty()) throw InvariantError("albedo: need at least one image");
  if (observed.size() != predicted.size()) throw InvariantError("albedo: image and prediction counts differ");
  const std::size_t n = patch_ids.size();
  for (std::size_t m = 0; m < observed.size(); ++m) {
    if (observed[m].size() != n || predicted[m].size() != n) {
      throw InvariantError("albedo: per-image vectors must cover every patch");
    }
  }

  std::vector<double> albedo(n);
  std::vector<double> ratios;
  for (std::size_t i = 0; i < n; ++i) {
    ratios.clear();
    for (std::size_t m = 0; m < observed.size(); ++m) {
      const double obs = observed[m][i];
      const double pred = predicted[m][i];
      if (!std::isfinite(obs) || !(pred >= opts.min_illuminance)) continue;
      ratios.push_back(kPi * obs / pred);
    }
    if (ratios.empty()) {
      throw NumericError("albedo: patch " + std::to_string(patch_ids[i]) + " has no usable observation");
    }
    std::sort(ratios.begin(), ratios.end());
    const std::size_t mid = ratios.size() / 2;
    const double median = ratios.size() % 2 == 1 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
    albedo[i] = std::clamp(median, 0.0, kMaxAlbedo);
  }
  return albedo;
}

std::vector<double> estimate_albedo(std::span<const IntensityImage> images,
                                    std::span<const std::vector<double>> activations, const Scene& scene,
                                    const AccelIndex& accel, const AlbedoOptions& opts) {
  if (images.empty()) throw InvariantError("albedo: need at least one image");
  if (images.size() != activations.size()) throw InvariantError("albedo: one dim vector per image is required");
  const Camera& cam = scene.camera;
  const std::size_t n = scene.patches.size();

  // Pixel each patch center lands on, if the camera sees it.
  std::vector<std::optional<std::pair<int, int>>> pixel(n);
  parallel_for(n, [&](std::size_t i) {
    const Patch& p = scene.patches[i];
    if (p.normal.dot(cam.position - p.center) <= 0.0) return;
    const Vec3 uvz = cam.project(p.center);
    if (!(uvz.z() > 0.0)) return;
    const auto u = static_cast<int>(std::lround(uvz.x()));
    const auto v = static_cast<int>(std::lround(uvz.y()));
    if (u < 0 || v < 0 || u >= cam.width || v >= cam.height) return;
    const std::array<int, 1> ignore{p.id};
    if (!accel.visible(cam.position, p.center, ignore)) return;
    pixel[i] = std::pair{u, v};
  });

  std::vector<std::vector<double>> observed(images.size(), std::vector<double>(n));
  std::vector<std::vector<double>> predicted(images.size());
  for (std::size_t m = 0; m < images.size(); ++m) {
    const auto& img = images[m];
    if (img.width != cam.width || img.height != cam.height) {
      throw InvariantError("albedo: image " + std::to_string(m) + " does not match the camera resolution");
    }
    const auto e = emission_vector(scene, activations[m], accel).illuminance;
    predicted[m].assign(e.data(), e.data() + e.size());
    for (std::size_t i = 0; i < n; ++i) {
      observed[m][i] = pixel[i] ? img.at(pixel[i]->first, pixel[i]->second)
                                : std::numeric_limits<double>::quiet_NaN();
    }
  }
  std::vector<int> ids;
  for (const auto& p : scene.patches) ids.push_back(p.id);
  return albedo_from_observations(observed, predicted, ids, opts);
}

}  // namespace ils
