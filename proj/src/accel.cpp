// SPDX-License-Identifier: Apache-2.0
#include "ils/accel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

namespace ils {

namespace {

constexpr double kBoxPadding = 1e-6;

// Entry distance of the ray into the box within [t0, t1], if any.
std::optional<double> slab_entry(const Aabb& box, const Vec3& origin, const Vec3& dir, double t0,
                                 double t1) {
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / dir[a];
    double ta = (box.lo[a] - origin[a]) * inv;
    double tb = (box.hi[a] - origin[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

}  // namespace

std::optional<double> intersect_patch(const Patch& patch, const Ray& ray, double t_min) {
  const double denom = patch.normal.dot(ray.direction);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = patch.normal.dot(patch.center - ray.origin) / denom;
  if (!(t > t_min && t <= ray.t_max)) return std::nullopt;
  const Vec3 local = ray.origin + t * ray.direction - patch.center;
  if (std::abs(local.dot(patch.tangent_u)) > patch.half_extents.x() ||
      std::abs(local.dot(patch.tangent_v)) > patch.half_extents.y()) {
    return std::nullopt;
  }
  return t;
}

Aabb patch_bounds(const Patch& patch) {
  Aabb box;
  for (const Vec3& c : patch.corners()) box.grow(c);
  box.lo.array() -= kBoxPadding;
  box.hi.array() += kBoxPadding;
  return box;
}

AccelIndex::AccelIndex(std::vector<Patch> patches, double ray_epsilon)
    : patches_(std::move(patches)), epsilon_(ray_epsilon) {
  std::set<int> ids;
  for (const auto& p : patches_) {
    if (!ids.insert(p.id).second) {
      throw InvariantError("accel: duplicate patch id " + std::to_string(p.id));
    }
  }
  bounds_.reserve(patches_.size());
  std::vector<Vec3> centroids;
  centroids.reserve(patches_.size());
  for (const auto& p : patches_) {
    bounds_.push_back(patch_bounds(p));
    centroids.push_back(p.center);
  }
  order_.resize(patches_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!patches_.empty()) {
    nodes_.reserve(2 * patches_.size());
    build(0, static_cast<std::uint32_t>(patches_.size()), centroids);
  }
}

std::uint32_t AccelIndex::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Aabb box, centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.grow(bounds_[order_[i]]);
    centroid_box.grow(centroids[order_[i]]);
  }
  nodes_[index].box = box;

  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis = 0;
  const Vec3 extent = centroid_box.hi - centroid_box.lo;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  const std::uint32_t mid = begin + (end - begin) / 2;
  // Deterministic median: order by centroid along the axis, then by original index.
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids[a][axis], cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = left;
  nodes_[index].right = right;
  nodes_[index].count = 0;
  return index;
}

template <class Visit>
void AccelIndex::traverse(const Ray& ray, double t_limit, Visit&& visit) const {
  if (nodes_.empty()) return;
  std::array<std::uint32_t, 128> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const auto entry = slab_entry(node.box, ray.origin, ray.direction, epsilon_ * 0.5, t_limit);
    if (!entry) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        if (!visit(order_[k], t_limit)) return;
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.first;
    }
  }
}

std::optional<Hit> AccelIndex::cast_ray(const Ray& ray) const {
  double best_t = std::numeric_limits<double>::infinity();
  traverse(ray, ray.t_max, [&](std::uint32_t i, double& limit) {
    if (auto t = intersect_patch(patches_[i], ray, epsilon_); t && *t < best_t) {
      best_t = *t;
      limit = best_t;
    }
    return true;
  });
  if (!std::isfinite(best_t)) return std::nullopt;

  // Second pass: lowest id among hits tied with the nearest one.
  const double tie_limit = best_t + kHitTieEpsilon;
  std::optional<Hit> chosen;
  traverse(ray, std::min(tie_limit, ray.t_max), [&](std::uint32_t i, double&) {
    const auto t = intersect_patch(patches_[i], ray, epsilon_);
    if (t && *t <= tie_limit && (!chosen || patches_[i].id < chosen->patch_id)) {
      chosen = Hit{patches_[i].id, i, *t, ray.origin + *t * ray.direction};
    }
    return true;
  });
  return chosen;
}

std::vector<std::uint32_t> AccelIndex::overlapping(const Aabb& box) const {
  std::vector<std::uint32_t> out;
  if (nodes_.empty()) return out;
  const auto overlaps = [&](const Aabb& b) {
    return (b.lo.array() <= box.hi.array()).all() && (b.hi.array() >= box.lo.array()).all();
  };
  std::array<std::uint32_t, 128> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!overlaps(node.box)) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        if (overlaps(bounds_[order_[k]])) out.push_back(order_[k]);
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.first;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool AccelIndex::visible(const Vec3& a, const Vec3& b, std::span<const int> ignore) const {
  // Canonical endpoint order makes the predicate exactly symmetric.
  const bool swap = std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3);
  const Vec3& from = swap ? b : a;
  const Vec3& to = swap ? a : b;

  const Vec3 delta = to - from;
  const double length = delta.norm();
  if (length <= 2.0 * epsilon_) return true;

  Ray ray{from, delta / length, length - epsilon_};
  bool blocked = false;
  traverse(ray, ray.t_max, [&](std::uint32_t i, double&) {
    const Patch& p = patches_[i];
    if (std::find(ignore.begin(), ignore.end(), p.id) != ignore.end()) return true;
    if (intersect_patch(p, ray, epsilon_)) {
      blocked = true;
      return false;
    }
    return true;
  });
  return !blocked;
}

std::size_t AccelIndex::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0u, 1u}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[n].count == 0) {
      stack.emplace_back(nodes_[n].first, d + 1);
      stack.emplace_back(nodes_[n].right, d + 1);
    }
  }
  return best;
}

AccelIndex build_accel(std::vector<Patch> patches, double ray_epsilon) {
  if (patches.empty()) throw InvariantError("accel: cannot index an empty patch list");
  return AccelIndex(std::move(patches), ray_epsilon);
}

}  // namespace ils
