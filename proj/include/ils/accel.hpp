// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ils/scene.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace ils {

inline constexpr double kRayEpsilon = 1e-4;     // self-intersection offset, meters
inline constexpr double kHitTieEpsilon = 1e-9;  // hits this close in t are ties

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  double t_max = std::numeric_limits<double>::infinity();
};

struct Hit {
  int patch_id = -1;
  std::size_t index = 0;  // position of the patch in the indexed list
  double t = 0.0;
  Vec3 point = Vec3::Zero();
};

/// Parametric distance at which `ray` crosses the rectangle, if it does so
/// inside (t_min, t_max]. Both faces intersect; parallel rays never do.
std::optional<double> intersect_patch(const Patch& patch, const Ray& ray, double t_min);

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Aabb& b) const {
    return (lo.array() <= b.lo.array()).all() && (hi.array() >= b.hi.array()).all();
  }
};

Aabb patch_bounds(const Patch& patch);

/// Bounding-volume hierarchy over patch rectangles (median split on the
/// longest centroid axis, at most kLeafSize patches per leaf). Immutable
/// after construction; every query is safe to call concurrently.
class AccelIndex {
 public:
  static constexpr std::size_t kLeafSize = 4;

  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: offset into order_; inner: left child
    std::uint32_t count = 0;  // leaf: number of patches; inner: 0
    std::uint32_t right = 0;  // inner: right child
  };

  explicit AccelIndex(std::vector<Patch> patches, double ray_epsilon = kRayEpsilon);

  /// Nearest hit in (epsilon, t_max]; ties within kHitTieEpsilon resolve to
  /// the lowest patch id.
  std::optional<Hit> cast_ray(const Ray& ray) const;

  /// True iff no patch outside `ignore` blocks the open segment (a, b).
  bool visible(const Vec3& a, const Vec3& b, std::span<const int> ignore = {}) const;


  /// Indices of patches whose bounds overlap `box`, ascending.
  std::vector<std::uint32_t> overlapping(const Aabb& box) const;

  const std::vector<Patch>& patches() const { return patches_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& leaf_order() const { return order_; }
  double ray_epsilon() const { return epsilon_; }
  std::size_t depth() const;

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);
  template <class Visit>
  void traverse(const Ray& ray, double t_limit, Visit&& visit) const;

  std::vector<Patch> patches_;
  std::vector<Aabb> bounds_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  double epsilon_;
};

/// Convenience wrapper; throws InvariantError on empty input or duplicate ids.
AccelIndex build_accel(std::vector<Patch> patches, double ray_epsilon = kRayEpsilon);

}  // namespace ils
