// SPDX-License-Identifier: Apache-2.0
#include "ils/optimizer.hpp"

#include "ils/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace ils {

namespace {

constexpr std::size_t kMaxBinaryLuminaires = 16;
constexpr double kFeasibilitySlack = 1e-9;

// True when `a` is preferred over `b` among equal-power choices: at the first
// luminaire (in id order) where they differ, `a` is the one switched off.
bool prefer_by_tie_rule(std::span<const double> a, std::span<const double> b,
                        const std::vector<std::size_t>& id_order) {
  for (std::size_t l : id_order) {
    if (a[l] != b[l]) return a[l] < b[l];
  }
  return false;
}

std::vector<std::size_t> id_order(const OptimizeContext& ctx, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (ctx.luminaire_ids.size() == n) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ctx.luminaire_ids[a] < ctx.luminaire_ids[b]; });
  }
  return order;
}

double power_of(std::span<const double> dims, std::span<const double> powers) {
  double total = 0.0;
  for (std::size_t l = 0; l < dims.size(); ++l) total += powers[l] * dims[l];
  return total;
}

bool meets_floor(const ContributionMatrix* spatial, const IlsConfig& cfg, std::span<const double> dims) {
  if (!cfg.spatial_floor_lux || spatial == nullptr) return true;
  const Eigen::Map<const Eigen::VectorXd> d(dims.data(), static_cast<Eigen::Index>(dims.size()));
  const Eigen::VectorXd reading = spatial->A * d;
  return (reading.array() >= *cfg.spatial_floor_lux - kFeasibilitySlack).all();
}

std::string row_name(const ContributionMatrix& m, Eigen::Index k) {
  return m.row_ids.size() == static_cast<std::size_t>(m.A.rows())
             ? std::to_string(m.row_ids[static_cast<std::size_t>(k)])
             : "#" + std::to_string(k);
}

Optimum optimize_binary(const ContributionMatrix& occ, std::span<const double> powers, const IlsConfig& cfg,
                        const OptimizeContext& ctx) {
  const std::size_t n = powers.size();
  if (n > kMaxBinaryLuminaires) {
    throw InvariantError("binary mode enumerates at most 16 luminaires, got " + std::to_string(n));
  }
  const auto order = id_order(ctx, n);
  const std::uint32_t combos = 1u << n;
  std::vector<double> dims(n);
  auto decode = [&](std::uint32_t mask) {
    for (std::size_t l = 0; l < n; ++l) dims[l] = (mask >> l) & 1u ? 1.0 : 0.0;
  };
  auto feasible = [&] {
    const Eigen::VectorXd drop = occ.drop(dims);
    return (drop.array() <= cfg.delta_max_lux + kFeasibilitySlack).all() && meets_floor(ctx.spatial, cfg, dims);
  };

  double best_power = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < combos; ++mask) {
    decode(mask);
    if (feasible()) best_power = std::min(best_power, power_of(dims, powers));
  }
  if (!std::isfinite(best_power)) {
    throw InfeasibleError("no on/off configuration satisfies the constraints");
  }

  const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
  const double tol = 1e-9 * std::max(1.0, total);
  Optimum best;
  for (std::uint32_t mask = 0; mask < combos; ++mask) {
    decode(mask);
    const double p = power_of(dims, powers);
    if (p > best_power + tol || !feasible()) continue;
    if (best.dims.empty() || prefer_by_tie_rule(dims, best.dims, order)) {
      best.dims = dims;
      best.power_watts = p;
    }
  }
  return best;
}

Optimum optimize_continuous(const ContributionMatrix& occ, std::span<const double> powers,
                            const IlsConfig& cfg, const OptimizeContext& ctx) {
  // Substitute x = 1 - d: maximize saved power P.x with A x <= delta, x <= 1.
  const auto n = static_cast<Eigen::Index>(powers.size());
  const Eigen::Index k_occ = occ.A.rows();
  const bool floor = cfg.spatial_floor_lux && ctx.spatial != nullptr;
  const Eigen::Index k_sp = floor ? ctx.spatial->A.rows() : 0;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k_occ + k_sp + n, n);
  Eigen::VectorXd b(k_occ + k_sp + n);
  M.topRows(k_occ) = occ.A;
  b.head(k_occ).setConstant(cfg.delta_max_lux);
  if (floor) {
    M.middleRows(k_occ, k_sp) = ctx.spatial->A;
    const Eigen::VectorXd headroom = ctx.spatial->A.rowwise().sum().array() - *cfg.spatial_floor_lux;
    if ((headroom.array() < 0.0).any()) {
      throw InfeasibleError("spatial lux floor is not met even with every luminaire at full output");
    }
    b.segment(k_occ, k_sp) = headroom;
  }
  M.bottomRows(n).setIdentity();
  b.tail(n).setOnes();

  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(powers.data(), n);
  std::vector<double> x = simplex_max(M, b, c);

  // Pull back any round-off overshoot by scaling x toward 0 (always feasible).
  Eigen::VectorXd xv = Eigen::Map<Eigen::VectorXd>(x.data(), n).cwiseMax(0.0).cwiseMin(1.0);
  const Eigen::VectorXd lhs = M.topRows(k_occ + k_sp) * xv;
  double scale = 1.0;
  for (Eigen::Index r = 0; r < lhs.size(); ++r) {
    if (lhs[r] > b[r]) scale = std::min(scale, b[r] / lhs[r]);
  }
  xv *= scale;

  Optimum out;
  out.dims.resize(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < n; ++l) out.dims[static_cast<std::size_t>(l)] = std::clamp(1.0 - xv[l], 0.0, 1.0);
  out.power_watts = power_of(out.dims, powers);
  return out;
}

Optimum optimize_vfoa(const ContributionMatrix& occ, std::span<const double> powers, const IlsConfig& cfg,
                      const OptimizeContext& ctx) {
  if (ctx.in_vfoa.size() != powers.size()) {
    throw InvariantError("vfoa mode needs a VFOA membership flag per luminaire");
  }
  Optimum out;
  for (bool inside : ctx.in_vfoa) out.dims.push_back(inside ? 1.0 : 0.0);
  out.power_watts = power_of(out.dims, powers);
  const Eigen::VectorXd drop = occ.drop(out.dims);
  for (Eigen::Index k = 0; k < drop.size(); ++k) {
    if (drop[k] > cfg.delta_max_lux + kFeasibilitySlack) {
      throw InfeasibleError("occupant " + row_name(occ, k) + ": perceived drop " + std::to_string(drop[k]) +
                            " lux exceeds the " + std::to_string(cfg.delta_max_lux) + " lux budget");
    }
  }
  if (!meets_floor(ctx.spatial, cfg, out.dims)) {
    throw InfeasibleError("VFOA configuration violates the spatial lux floor");
  }
  return out;
}

}  // namespace

Eigen::VectorXd ContributionMatrix::drop(std::span<const double> dims) const {
  if (static_cast<Eigen::Index>(dims.size()) != A.cols()) throw InvariantError("dim vector size mismatch");
  Eigen::VectorXd off(A.cols());
  for (Eigen::Index l = 0; l < A.cols(); ++l) off[l] = 1.0 - dims[static_cast<std::size_t>(l)];
  return A * off;
}

IlsMode parse_mode(std::string_view text) {
  if (text == "binary") return IlsMode::binary;
  if (text == "continuous") return IlsMode::continuous;
  if (text == "vfoa" || text == "vfoa_gated") return IlsMode::vfoa_gated;
  throw InvariantError("unknown ILS mode '" + std::string(text) + "'");
}

std::string_view mode_name(IlsMode mode) {
  switch (mode) {
    case IlsMode::binary: return "binary";
    case IlsMode::continuous: return "continuous";
    case IlsMode::vfoa_gated: return "vfoa";
  }
  return "?";
}

ContributionMatrix probe_contributions(const Scene& scene, const LuminaireBasis& basis,
                                       const AccelIndex& accel, std::span<const SensorPose> poses,
                                       std::span<const LuxmeterSensitivityCurve> lscs, std::size_t n_rays) {
  const auto rows = static_cast<Eigen::Index>(poses.size());
  const std::size_t n_lum = scene.luminaires.size();
  ContributionMatrix m;
  m.A = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(n_lum));
  m.full_lit = Eigen::VectorXd::Zero(rows);
  const std::vector<double> ones(n_lum, 1.0);
  const Eigen::VectorXd full_field = basis.combine_exitance(ones);

  parallel_for(poses.size(), [&](std::size_t k) {
    const LuxmeterProbe probe(scene, accel, poses[k], lscs[k], n_rays);
    std::vector<double> unit(n_lum, 0.0);
    for (std::size_t l = 0; l < n_lum; ++l) {
      unit[l] = 1.0;
      m.A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = probe.read(basis.exitance[l], unit).total;
      unit[l] = 0.0;
    }
    m.full_lit[static_cast<Eigen::Index>(k)] = probe.read(full_field, ones).total;
  });
  return m;
}

ContributionMatrix contribution_matrix(const Scene& scene, const LuminaireBasis& basis,
                                       const AccelIndex& accel, std::size_t n_rays) {
  if (scene.occupants.empty()) throw InvariantError("contribution matrix needs at least one occupant");
  std::vector<SensorPose> poses;
  std::vector<LuxmeterSensitivityCurve> lscs;
  std::vector<int> ids;
  for (const auto& o : scene.occupants) {
    poses.push_back({o.head_position, o.gaze});
    lscs.push_back(o.lsc);
    ids.push_back(o.id);
  }
  auto m = probe_contributions(scene, basis, accel, poses, lscs, n_rays);
  m.row_ids = std::move(ids);
  return m;
}

ContributionMatrix sensor_contribution_matrix(const Scene& scene, const LuminaireBasis& basis,
                                              const AccelIndex& accel, std::size_t n_rays,
                                              std::optional<SensorRole> role) {
  std::vector<SensorPose> poses;
  std::vector<LuxmeterSensitivityCurve> lscs;
  std::vector<int> ids;
  for (const auto& s : scene.sensors) {
    if (role && s.role != *role) continue;
    poses.push_back({s.position, s.facing});
    lscs.push_back(s.lsc);
    ids.push_back(s.id);
  }
  auto m = probe_contributions(scene, basis, accel, poses, lscs, n_rays);
  m.row_ids = std::move(ids);
  return m;
}

std::vector<bool> vfoa_mask(const Scene& scene, const AccelIndex& accel) {
  std::set<int> seen;
  for (const auto& o : scene.occupants) {
    const auto ids = vfoa_visible_luminaires(o, scene, accel);
    seen.insert(ids.begin(), ids.end());
  }
  std::vector<bool> mask;
  for (const auto& l : scene.luminaires) mask.push_back(seen.contains(l.id));
  return mask;
}

Optimum optimize(const ContributionMatrix& occupants, std::span<const double> powers, const IlsConfig& cfg,
                 const OptimizeContext& ctx) {
  if (occupants.A.cols() != static_cast<Eigen::Index>(powers.size())) {
    throw InvariantError("contribution matrix has " + std::to_string(occupants.A.cols()) + " columns but " +
                         std::to_string(powers.size()) + " luminaire powers were given");
  }
  if (!(cfg.delta_max_lux >= 0.0)) throw InvariantError("delta_max must be >= 0");
  if (!(cfg.overhead_watts >= 0.0)) throw InvariantError("overhead_watts must be >= 0");
  for (double p : powers) {
    if (!(p >= 0.0)) throw InvariantError("luminaire power must be >= 0");
  }
  if (cfg.spatial_floor_lux && ctx.spatial == nullptr) {
    throw InvariantError("spatial floor requested without spatial sensor contributions");
  }
  switch (cfg.mode) {
    case IlsMode::binary: return optimize_binary(occupants, powers, cfg, ctx);
    case IlsMode::continuous: return optimize_continuous(occupants, powers, cfg, ctx);
    case IlsMode::vfoa_gated: return optimize_vfoa(occupants, powers, cfg, ctx);
  }
  throw InvariantError("unknown ILS mode");
}

std::vector<double> simplex_max(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = M.rows(), n = M.cols();
  if ((b.array() < 0.0).any()) throw InvariantError("simplex: right-hand side must be non-negative");
  constexpr double eps = 1e-12;

  // Tableau [M | I | b] with objective row [-c | 0 | 0].
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  T.topLeftCorner(m, n) = M;
  T.block(0, n, m, m).setIdentity();
  T.topRightCorner(m, 1) = b;
  T.bottomLeftCorner(1, n) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  std::iota(basis.begin(), basis.end(), n);

  for (int guard = 0; guard < 100000; ++guard) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (T(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, enter) <= eps) continue;
      const double ratio = T(i, n + m) / T(i, enter);
      const bool tie = std::abs(ratio - best_ratio) <= eps;
      if (leave < 0 || ratio < best_ratio - eps ||
          (tie && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) throw NumericError("simplex: objective is unbounded");

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) x[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = T(i, n + m);
  }
  return x;
}

EnergyReport energy_report(std::span<const double> dims, std::span<const double> powers, double hours,
                           const IlsConfig& cfg) {
  if (!(hours > 0.0)) throw InvariantError("energy report: hours must be > 0");
  if (dims.size() != powers.size()) throw InvariantError("energy report: dims and powers differ in size");
  EnergyReport r;
  r.hours = hours;
  double full = 0.0, used = 0.0;
  for (std::size_t l = 0; l < powers.size(); ++l) {
    full += powers[l];
    used += powers[l] * dims[l];
    r.delta_watt += powers[l] * (1.0 - dims[l]);
  }
  r.baseline_wh = full * hours;
  r.ils_wh = (used + cfg.overhead_watts) * hours;
  r.saving_fraction = r.baseline_wh > 0.0 ? 1.0 - r.ils_wh / r.baseline_wh : 0.0;
  return r;
}

ScenarioResult evaluate_scenario(const Scene& scene, const LuminaireBasis& basis, std::span<const double> dims,
                                 const std::map<int, double>& ground_truth, const AccelIndex& accel,
                                 std::size_t n_rays, const IlsConfig& cfg) {
  for (const auto& [id, lux] : ground_truth) {
    const bool known = std::any_of(scene.sensors.begin(), scene.sensors.end(),
                                   [id = id](const Sensor& s) { return s.id == id; });
    if (!known) throw InvariantError("ground truth names unknown sensor id " + std::to_string(id));
  }

  ScenarioResult out;
  out.dims.assign(dims.begin(), dims.end());
  const Eigen::VectorXd field = basis.combine_exitance(dims);
  const std::vector<double> ones(scene.luminaires.size(), 1.0);
  const Eigen::VectorXd full_field = basis.combine_exitance(ones);

  std::vector<double> sensor_lux(scene.sensors.size());
  parallel_for(scene.sensors.size(), [&](std::size_t i) {
    const auto& s = scene.sensors[i];
    sensor_lux[i] = LuxmeterProbe(scene, accel, {s.position, s.facing}, s.lsc, n_rays).read(field, dims).total;
  });
  for (std::size_t i = 0; i < scene.sensors.size(); ++i) {
    const int id = scene.sensors[i].id;
    out.sensor_lux[id] = sensor_lux[i];
    if (auto it = ground_truth.find(id); it != ground_truth.end()) {
      out.epsilon_est[id] = std::abs(sensor_lux[i] - it->second);
    }
  }

  std::vector<std::pair<double, double>> occ(scene.occupants.size());
  parallel_for(scene.occupants.size(), [&](std::size_t k) {
    const auto& o = scene.occupants[k];
    const LuxmeterProbe probe(scene, accel, {o.head_position, o.gaze}, o.lsc, n_rays);
    occ[k] = {probe.read(field, dims).total, probe.read(full_field, ones).total};
  });
  for (std::size_t k = 0; k < scene.occupants.size(); ++k) {
    const int id = scene.occupants[k].id;
    out.occupant_lux[id] = occ[k].first;
    out.delta_lux[id] = occ[k].second - occ[k].first;
  }

  const auto powers = scene.powers();
  out.energy = energy_report(dims, powers, 24.0, cfg);
  out.delta_watt = out.energy.delta_watt;
  return out;
}

std::map<int, double> parse_ground_truth_csv(std::string_view text) {
  std::map<int, double> out;
  int line_no = 0;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    std::erase_if(line, [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; });
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    const std::string where = "ground truth line " + std::to_string(line_no);
    if (comma == std::string::npos) throw ParseError(where + ": expected sensor_id,lux");
    int id = 0;
    double lux = 0.0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, id);
    const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), lux);
    const bool ok = r1.ec == std::errc{} && r1.ptr == line.data() + comma && r2.ec == std::errc{} &&
                    r2.ptr == line.data() + line.size();
    if (!ok) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw ParseError(where + ": expected sensor_id,lux");
    }
    first = false;
    if (!out.emplace(id, lux).second) throw ParseError(where + ": duplicate sensor id " + std::to_string(id));
  }
  return out;
}

}  // namespace ils
