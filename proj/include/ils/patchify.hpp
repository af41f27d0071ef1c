// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/accel.hpp"
#include "ils/scene.hpp"

#include <span>
#include <vector>

namespace ils {

struct PatchifyOptions {
  double patch_size = 0.25;  // meters
  int min_pixels = 8;
  double default_albedo = 0.5;
  int first_id = 0;
};

/// Back-projects valid depth pixels to world points, bins them into a cubic
/// grid of `patch_size` cells and fits one plane-aligned rectangle per cell
/// holding at least `min_pixels` points that span a plane. Normals face the
/// camera.
std::vector<Patch> patchify_depth(const DepthImage& depth, const Camera& camera, const PatchifyOptions& opts = {});

struct AlbedoOptions {
  double min_illuminance = 1.0;  // lux; darker predictions are skipped
};

/// Per-patch albedo from paired observations: median over images of
/// pi * observed / predicted, clamped to [0, 1 - 1e-3]. `observed[m][i]` is
/// NaN where image m does not see patch i.
std::vector<double> albedo_from_observations(const std::vector<std::vector<double>>& observed,
                                             const std::vector<std::vector<double>>& predicted,
                                             std::span<const int> patch_ids, const AlbedoOptions& opts = {});

/// Samples each image at the projection of every patch center and pairs it
/// with the direct illuminance predicted for that image's dim vector.
std::vector<double> estimate_albedo(std::span<const IntensityImage> images,
                                    std::span<const std::vector<double>> activations, const Scene& scene,
                                    const AccelIndex& accel, const AlbedoOptions& opts = {});

}  // namespace ils
