// SPDX-License-Identifier: Apache-2.0
#include "ils/radiosity.hpp"

#include "ils/hash.hpp"
#include "ils/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>

namespace ils {

namespace {

constexpr double kRowSumLimit = 1.0 + 1e-3;
constexpr double kRefineTolerance = 1e-4;  // change of a cell estimate that splits it
constexpr int kRefineDepth = 2;
constexpr char kCacheMagic[8] = {'I', 'L', 'S', 'F', 'F', 'C', '0', '1'};
constexpr std::uint32_t kCacheVersion = 2;

// True when every corner of `other` lies on or behind the plane of `p`.
bool entirely_behind(const Patch& p, const Patch& other) {
  for (const Vec3& c : other.corners()) {
    if (p.normal.dot(c - p.center) > 1e-12) return false;
  }
  return true;
}

// Side of the plane of `p` on which all corners of `q` lie: +1 front, -1
// back, 0 straddling.
int side_of(const Patch& p, const Patch& q) {
  bool front = true, back = true;
  for (const Vec3& c : q.corners()) {
    const double d = p.normal.dot(c - p.center);
    front = front && d >= -1e-12;
    back = back && d <= 1e-12;
  }
  return front ? 1 : back ? -1 : 0;
}

// True when every point of `pts` lies on the far side of some face of the
// convex hull of `a` and `b` (or touches it).
bool outside_hull(const std::array<Vec3, 8>& hull, const std::array<Vec3, 4>& pts) {
  for (int e = 0; e < 8; ++e) {
    const int base = e < 4 ? 0 : 4, other = e < 4 ? 4 : 0;
    const Vec3& p0 = hull[base + e % 4];
    const Vec3& p1 = hull[base + (e + 1) % 4];
    for (int k = 0; k < 4; ++k) {
      const Vec3 n = (p1 - p0).cross(hull[other + k] - p0);
      const double len = n.norm();
      if (len <= 1e-12) continue;
      const Vec3 u = n / len;
      double lo = 0.0, hi = 0.0;
      for (const Vec3& h : hull) {
        const double d = u.dot(h - p0);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      if (lo < -1e-12 && hi > 1e-12) continue;  // not a hull face
      const double sign = hi > 1e-12 ? -1.0 : 1.0;
      bool separated = true;
      for (const Vec3& q : pts) separated = separated && sign * u.dot(q - p0) >= -1e-12;
      if (separated) return true;
    }
  }
  return false;
}

// Patches that might block some segment between `a` and `b` (a superset of
// the true blockers), as accel indices.
std::vector<std::uint32_t> potential_occluders(const Patch& a, const Patch& b, const AccelIndex& accel) {
  Aabb box = patch_bounds(a);
  box.grow(patch_bounds(b));
  const auto ca = a.corners(), cb = b.corners();
  const std::array<Vec3, 8> hull{ca[0], ca[1], ca[2], ca[3], cb[0], cb[1], cb[2], cb[3]};
  std::vector<std::uint32_t> out;
  for (std::uint32_t k : accel.overlapping(box)) {
    const Patch& c = accel.patches()[k];
    if (c.id == a.id || c.id == b.id) continue;
    if (side_of(a, c) < 0 || side_of(b, c) < 0) continue;
    const int sa = side_of(c, a), sb = side_of(c, b);
    if (sa != 0 && sa == sb) continue;
    if (outside_hull(hull, c.corners())) continue;
    out.push_back(k);
  }
  return out;
}

bool near_field(const Patch& a, const Patch& b) {
  const double reach = a.half_extents.norm() + b.half_extents.norm();
  return (a.center - b.center).norm() < 1.5 * reach;
}

using Polygon = std::vector<Vec3>;

// Keeps the part of a convex polygon where n.(p - o) >= 0.
Polygon clip_half_space(const Polygon& poly, const Vec3& o, const Vec3& n) {
  Polygon out;
  out.reserve(poly.size() + 2);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec3& a = poly[k];
    const Vec3& b = poly[(k + 1) % poly.size()];
    const double da = n.dot(a - o), db = n.dot(b - o);
    if (da >= 0.0) out.push_back(a);
    if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) out.push_back(a + (da / (da - db)) * (b - a));
  }
  return out.size() >= 3 ? out : Polygon{};
}

// Intersection of two convex polygons lying in a common plane with normal n.
Polygon intersect_convex(Polygon p, const Polygon& q, const Vec3& n) {
  Vec3 twice_area = Vec3::Zero();
  for (std::size_t k = 0; k < q.size(); ++k) twice_area += q[k].cross(q[(k + 1) % q.size()]);
  const double orient = n.dot(twice_area);
  if (std::abs(orient) <= 1e-18) return {};
  const double sign = orient > 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < q.size() && !p.empty(); ++k) {
    const Vec3& a = q[k];
    const Vec3& b = q[(k + 1) % q.size()];
    p = clip_half_space(p, a, sign * n.cross(b - a));
  }
  return p;
}

// Exact differential-area-to-polygon form factor (contour integral), no
// occlusion. The polygon must lie in front of the plane (x, n).
double point_polygon_factor(const Vec3& x, const Vec3& n, const Polygon& poly) {
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec3 a = poly[k] - x;
    const Vec3 b = poly[(k + 1) % poly.size()] - x;
    const Vec3 c = a.cross(b);
    const double cn = c.norm();
    if (cn <= 1e-300) continue;
    sum += std::atan2(cn, a.dot(b)) * n.dot(c) / cn;
  }
  return std::abs(sum) / (2.0 * kPi);
}

// Central projection from x of the part of `c` lying between x and the plane
// (p, n) onto that plane. `dx` is the height of x above the plane.
Polygon shadow_on_plane(const Vec3& x, const Patch& c, const Vec3& p, const Vec3& n, double dx) {
  const auto corners = c.corners();
  Polygon poly(corners.begin(), corners.end());
  poly = clip_half_space(poly, p, n);
  if (poly.empty()) return {};
  poly = clip_half_space(poly, p + (dx * (1.0 - 1e-9)) * n, -n);
  for (Vec3& q : poly) {
    const double d = n.dot(q - p);
    q = x + (dx / (dx - d)) * (q - x);
  }
  return poly;
}

// Form factor from point x (normal nx) to the visible part of `region`:
// inclusion-exclusion over the convex shadows cast onto its plane.
double visible_factor(const Vec3& x, const Vec3& nx, const Polygon& region, const Vec3& plane_n,
                      const std::vector<Polygon>& shadows, std::size_t start, double sign) {
  double total = sign * point_polygon_factor(x, nx, region);
  for (std::size_t k = start; k < shadows.size(); ++k) {
    const Polygon overlap = intersect_convex(region, shadows[k], plane_n);
    if (!overlap.empty()) total += visible_factor(x, nx, overlap, plane_n, shadows, k + 1, -sign);
  }
  return total;
}

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int k) {
  std::vector<double> x(static_cast<std::size_t>(k)), w(x.size());
  for (int i = 0; i < k; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(k, t);
      dp = k * (t * p - (k > 0 ? std::legendre(k - 1, t) : 0.0)) / (t * t - 1.0);
      const double step = p / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    dp = k * (t * std::legendre(k, t) - std::legendre(k - 1, t)) / (t * t - 1.0);
    x[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

// Outer integration over the emitting patch: midpoint cells for adaptive
// refinement, a tensor Gauss rule for smooth pairs.
struct OuterRule {
  std::vector<Vec2> cells;
  std::vector<Vec2> nodes;
  std::vector<double> weights;
  int k = 0;  // cells per side, 0 when the count is not a square
};

OuterRule outer_rule(int n_samples) {
  OuterRule r;
  r.cells = patch_sample_grid(n_samples);
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_samples))));
  if (k * k != n_samples) return r;
  r.k = k;
  const auto [x, w] = gauss_legendre(k);
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = 0; b < x.size(); ++b) {
      r.nodes.emplace_back(x[a], x[b]);
      r.weights.push_back(0.25 * w[a] * w[b]);
    }
  }
  return r;
}

// Mean over `a` of the exact point-to-patch factor toward the part of `b`
// that each point can see. With occluders or near contact, each cell of a
// square grid is split until its estimate settles.
double patch_factor(const Patch& a, const Patch& b, const OuterRule& coarse, const OuterRule& fine,
                    const AccelIndex& accel, bool occlusion) {
  if (entirely_behind(a, b) || entirely_behind(b, a)) return 0.0;
  const auto blockers = occlusion ? potential_occluders(a, b, accel) : std::vector<std::uint32_t>{};
  const auto corners = b.corners();
  const Polygon target(corners.begin(), corners.end());
  const bool near = near_field(a, b);
  // Adjacent patches get a finer outer grid; the point factor varies fastest there.
  const OuterRule& rule = near ? fine : coarse;
  std::vector<Polygon> shadows;
  auto point = [&](const Vec2& st) {
    const Vec3 x = a.at(st.x(), st.y());
    const double dx = b.normal.dot(x - b.center);
    if (dx <= 0.0) return 0.0;
    const Polygon region = clip_half_space(target, x, a.normal);
    if (region.empty()) return 0.0;
    shadows.clear();
    for (std::uint32_t k : blockers) {
      Polygon sh = shadow_on_plane(x, accel.patches()[k], b.center, b.normal, dx);
      if (!sh.empty()) shadows.push_back(std::move(sh));
    }
    return std::max(0.0, visible_factor(x, a.normal, region, b.normal, shadows, 0, 1.0));
  };

  const int k = rule.k;
  // Splits a cell in four until the mean of its children settles.
  std::function<double(const Vec2&, double, double, int)> refine = [&](const Vec2& c, double h, double parent,
                                                                        int depth) {
    const double q = 0.5 * h;
    const std::array<Vec2, 4> kids{Vec2(c.x() - q, c.y() - q), Vec2(c.x() + q, c.y() - q),
                                   Vec2(c.x() - q, c.y() + q), Vec2(c.x() + q, c.y() + q)};
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) v[i] = point(kids[i]);
    const double mean = 0.25 * (v[0] + v[1] + v[2] + v[3]);
    if (depth >= kRefineDepth || std::abs(mean - parent) <= kRefineTolerance) return mean;
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) sum += refine(kids[i], q, v[i], depth + 1);
    return 0.25 * sum;
  };

  double total = 0.0;
  if (k == 0) {
    for (const Vec2& st : rule.cells) total += point(st);
    return total / static_cast<double>(rule.cells.size());
  }
  if (near || !blockers.empty()) {
    for (const Vec2& st : rule.cells) total += refine(st, 1.0 / k, point(st), 1);
    return total / static_cast<double>(rule.cells.size());
  }
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) total += rule.weights[i] * point(rule.nodes[i]);
  return total;
}

void check_dims(std::span<const double> dims, std::size_t expected) {
  if (dims.size() != expected) {
    throw InvariantError("dim vector has " + std::to_string(dims.size()) + " entries, expected " +
                         std::to_string(expected));
  }
  for (double d : dims) {
    if (!(d >= 0.0 && d <= 1.0)) throw InvariantError("dim value outside [0, 1]");
  }
}

// Additive recurrence on the plastic constant (R2 sequence) over [-1, 1]^2.
std::vector<Vec2> r2_points(int n) {
  constexpr double g = 1.32471795724474602596;
  constexpr double a1 = 1.0 / g, a2 = 1.0 / (g * g);
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = std::fmod(0.5 + a1 * i, 1.0);
    const double t = std::fmod(0.5 + a2 * i, 1.0);
    out.emplace_back(2.0 * s - 1.0, 2.0 * t - 1.0);
  }
  return out;
}

}  // namespace

double direct_illuminance(const Patch& patch, const Luminaire& luminaire, double dim,
                          const AccelIndex& accel) {
  const Vec3 to_light = luminaire.position - patch.center;
  const double r2 = to_light.squaredNorm();
  if (r2 <= 0.0) return 0.0;
  const double cos_in = patch.normal.dot(to_light) / std::sqrt(r2);
  if (cos_in <= 0.0) return 0.0;
  const std::array<int, 1> ignore{patch.id};
  if (!accel.visible(luminaire.position, patch.center, ignore)) return 0.0;
  return dim * (luminaire.intensity_toward(patch.center) * cos_in / r2);
}

EmissionVector emission_vector(const Scene& scene, std::span<const double> dims,
                               const AccelIndex& accel) {
  check_dims(dims, scene.luminaires.size());
  EmissionVector out;
  out.dims.assign(dims.begin(), dims.end());
  out.illuminance = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scene.patches.size()));
  parallel_for(scene.patches.size(), [&](std::size_t i) {
    double e = 0.0;
    for (std::size_t l = 0; l < scene.luminaires.size(); ++l) {
      e += direct_illuminance(scene.patches[i], scene.luminaires[l], dims[l], accel);
    }
    out.illuminance[static_cast<Eigen::Index>(i)] = e;
  });
  return out;
}

std::vector<Vec2> patch_sample_grid(int n_samples) {
  if (n_samples < 1) throw InvariantError("form factor: n_samples must be >= 1");
  std::vector<Vec2> grid;
  grid.reserve(static_cast<std::size_t>(n_samples));
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_samples))));
  if (k * k == n_samples) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        grid.emplace_back(-1.0 + (2.0 * a + 1.0) / k, -1.0 + (2.0 * b + 1.0) / k);
      }
    }
    return grid;
  }
  // Non-square counts fall back to the R2 sequence.
  return r2_points(n_samples);
}

double form_factor(const Patch& from, const Patch& to, const AccelIndex& accel, int n_samples, bool occlusion) {
  return patch_factor(from, to, outer_rule(n_samples), outer_rule(4 * n_samples), accel, occlusion);
}

FormFactorMatrix form_factor_matrix(const std::vector<Patch>& patches, const AccelIndex& accel, int n_samples,
                                    bool occlusion) {
  const auto n = static_cast<Eigen::Index>(patches.size());
  if (n < 2) throw InvariantError("form factor matrix needs at least 2 patches");
  const auto coarse = outer_rule(n_samples);
  const auto fine = outer_rule(4 * n_samples);

  FormFactorMatrix ff;
  ff.areas.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) ff.areas[i] = patches[static_cast<std::size_t>(i)].area();

  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n);
  parallel_for(patches.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < patches.size(); ++j) {
      if (j == i) continue;
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          patch_factor(patches[i], patches[j], coarse, fine, accel, occlusion);
    }
  });

  ff.F = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double fij = raw(i, j);
      const double fji = raw(j, i);
      const double shared = 0.5 * (ff.areas[i] * fij + ff.areas[j] * fji);
      ff.F(i, j) = shared / ff.areas[i];
      ff.F(j, i) = shared / ff.areas[j];
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double row = ff.F.row(i).sum();
    if (row > kRowSumLimit) {
      throw NumericError("form factors of patch " + std::to_string(patches[static_cast<std::size_t>(i)].id) +
                         " sum to " + std::to_string(row) + " (> 1 + 1e-3)");
    }
  }
  return ff;
}

RadiositySolver::RadiositySolver(const FormFactorMatrix& ff, std::span<const double> albedo,
                                 SolverOptions opts)
    : opts_(opts) {
  const auto n = ff.F.rows();
  if (ff.F.cols() != n || static_cast<Eigen::Index>(albedo.size()) != n) {
    throw InvariantError("radiosity: form factor and albedo sizes disagree");
  }
  albedo_ = Eigen::Map<const Eigen::VectorXd>(albedo.data(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(albedo_[i] >= 0.0 && albedo_[i] < 1.0)) {
      throw InvariantError("radiosity: albedo of patch index " + std::to_string(i) + " outside [0, 1)");
    }
  }
  rf_ = albedo_.asDiagonal() * ff.F;
  if (static_cast<std::size_t>(n) <= opts_.dense_limit) {
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - rf_;
    qr_ = std::make_shared<const Eigen::HouseholderQR<Eigen::MatrixXd>>(system);
  }
}

double RadiositySolver::residual(const Eigen::VectorXd& b, const Eigen::VectorXd& rhs) const {
  const double scale = rhs.norm();
  if (scale == 0.0) return b.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (b - rf_ * b - rhs).norm() / scale;
}

RadiositySolution RadiositySolver::solve(const Eigen::VectorXd& emission) const {
  if (emission.size() != rf_.rows()) throw InvariantError("radiosity: emission size mismatch");
  const Eigen::VectorXd rhs = albedo_.cwiseProduct(emission);
  RadiositySolution sol;
  if (rhs.isZero(0.0)) {
    sol.exitance = Eigen::VectorXd::Zero(rhs.size());
    return sol;
  }

  if (qr_) {
    sol.exitance = qr_->solve(rhs);
    sol.residual = residual(sol.exitance, rhs);
    if (sol.residual >= 0.1 * opts_.tolerance) {  // one step of iterative refinement
      sol.exitance += qr_->solve(Eigen::VectorXd(rhs - (sol.exitance - rf_ * sol.exitance)));
    }
  } else {
    // Jacobi / Neumann iteration: B <- R E + R F B.
    sol.exitance = rhs;
    for (int it = 0; it < opts_.max_iterations; ++it) {
      Eigen::VectorXd next = rhs + rf_ * sol.exitance;
      const double change = (next - sol.exitance).norm();
      sol.exitance.swap(next);
      if (change <= 0.01 * opts_.tolerance * rhs.norm()) break;
    }
  }
  // Round-off can leave tiny negatives where the exact answer is zero.
  sol.exitance = sol.exitance.cwiseMax(0.0);
  sol.residual = residual(sol.exitance, rhs);
  if (!(sol.residual < opts_.tolerance)) {
    throw NumericError("radiosity solve did not converge (relative residual " +
                       std::to_string(sol.residual) + ")");
  }
  return sol;
}

RadiositySolution solve_radiosity(const FormFactorMatrix& ff, std::span<const double> albedo,
                                  const EmissionVector& emission, SolverOptions opts) {
  return RadiositySolver(ff, albedo, opts).solve(emission.illuminance);
}

Eigen::VectorXd LuminaireBasis::combine_exitance(std::span<const double> dims) const {
  check_dims(dims, exitance.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(exitance.empty() ? 0 : exitance.front().size());
  for (std::size_t l = 0; l < exitance.size(); ++l) out += dims[l] * exitance[l];
  return out;
}

Eigen::VectorXd LuminaireBasis::combine_emission(std::span<const double> dims) const {
  check_dims(dims, emission.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(emission.empty() ? 0 : emission.front().size());
  for (std::size_t l = 0; l < emission.size(); ++l) out += dims[l] * emission[l];
  return out;
}

Eigen::VectorXd RadiosityModel::incident(std::span<const double> dims) const {
  return basis.combine_emission(dims) + form_factors.F * basis.combine_exitance(dims);
}

LuminaireBasis build_basis(const Scene& scene, const AccelIndex& accel, const FormFactorMatrix& ff,
                           const SolverOptions& opts) {
  std::vector<double> albedo;
  albedo.reserve(scene.patches.size());
  for (const auto& p : scene.patches) albedo.push_back(p.albedo);
  const RadiositySolver solver(ff, albedo, opts);

  const std::size_t n_lum = scene.luminaires.size();
  const auto n = static_cast<Eigen::Index>(scene.patches.size());
  LuminaireBasis basis;
  basis.emission.assign(n_lum, Eigen::VectorXd::Zero(n));
  basis.exitance.assign(n_lum, Eigen::VectorXd::Zero(n));
  basis.residuals.assign(n_lum, 0.0);
  for (const auto& l : scene.luminaires) basis.luminaire_ids.push_back(l.id);

  parallel_for(n_lum, [&](std::size_t l) {
    const Luminaire& lum = scene.luminaires[l];
    for (Eigen::Index i = 0; i < n; ++i) {
      basis.emission[l][i] = direct_illuminance(scene.patches[static_cast<std::size_t>(i)], lum, 1.0, accel);
    }
    try {
      const auto sol = solver.solve(basis.emission[l]);
      basis.exitance[l] = sol.exitance;
      basis.residuals[l] = sol.residual;
    } catch (const NumericError& e) {
      throw NumericError("luminaire " + std::to_string(lum.id) + ": " + e.what());
    }
  });
  return basis;
}

RadiosityModel build_radiosity(const Scene& scene, const AccelIndex& accel, const BasisOptions& opts) {
  RadiosityModel model;
  const auto key = form_factor_key(scene.patches, opts.n_samples, accel.ray_epsilon(), opts.occlusion);
  if (opts.ff_cache) {
    if (auto cached = load_form_factors(*opts.ff_cache, key)) {
      model.form_factors = std::move(*cached);
      model.cache_hit = true;
    }
  }
  if (!model.cache_hit) {
    model.form_factors = form_factor_matrix(scene.patches, accel, opts.n_samples, opts.occlusion);
    if (opts.ff_cache) save_form_factors(*opts.ff_cache, key, model.form_factors);
  }
  model.basis = build_basis(scene, accel, model.form_factors, opts.solver);
  return model;
}

std::uint64_t form_factor_key(const std::vector<Patch>& patches, int n_samples, double ray_epsilon, bool occlusion) {
  Fnv1a h;
  h.update_value(kCacheVersion);
  h.update_value(static_cast<std::uint64_t>(patches.size()));
  for (const auto& p : patches) {
    h.update_value(p.id);
    for (const Vec3* v : {&p.center, &p.normal, &p.tangent_u, &p.tangent_v}) {
      for (int k = 0; k < 3; ++k) h.update_value((*v)[k]);
    }
    h.update_value(p.half_extents.x());
    h.update_value(p.half_extents.y());
  }
  h.update_value(n_samples);
  h.update_value(static_cast<std::uint8_t>(occlusion));
  h.update_value(ray_epsilon);
  return h.digest();
}

void save_form_factors(const std::filesystem::path& path, std::uint64_t key, const FormFactorMatrix& ff) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write form factor cache '" + path.string() + "'");
    const auto n = static_cast<std::uint64_t>(ff.F.rows());
    out.write(kCacheMagic, sizeof kCacheMagic);
    out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof kCacheVersion);
    out.write(reinterpret_cast<const char*>(&key), sizeof key);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(ff.areas.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = ff.F;
    out.write(reinterpret_cast<const char*>(rows.data()),
              static_cast<std::streamsize>(n * n * sizeof(double)));
  }
  std::filesystem::rename(tmp, path);
}

std::optional<FormFactorMatrix> load_form_factors(const std::filesystem::path& path, std::uint64_t key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t stored_key = 0, n = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&stored_key), sizeof stored_key);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || !std::equal(magic, magic + 8, kCacheMagic) || version != kCacheVersion ||
      stored_key != key || n > (1u << 16)) {
    return std::nullopt;
  }
  FormFactorMatrix ff;
  ff.areas.resize(static_cast<Eigen::Index>(n));
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, n);
  in.read(reinterpret_cast<char*>(ff.areas.data()), static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!in) return std::nullopt;
  ff.F = rows;
  return ff;
}

}  // namespace ils
