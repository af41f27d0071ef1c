// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "ils/cli.hpp"
#include "ils/perception.hpp"
#include "ils/report.hpp"

#include "support.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

namespace ils {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << ']';
    }
  }
};

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = b.norm();
  return scale == 0.0 ? a.norm() : (a - b).norm() / scale;
}

std::vector<double> albedos(const std::vector<Patch>& ps) {
  std::vector<double> out;
  for (const auto& p : ps) out.push_back(p.albedo);
  return out;
}

void ac1(Outcome& o) {
  const Scene room = test::load_room8();
  const auto powers = room.powers();
  const IlsConfig cfg;
  const std::vector<double> ones(powers.size(), 1.0);
  const std::vector<double> two_on{0, 0, 1, 0, 0, 0, 1, 0};
  const auto full = energy_report(ones, powers, 24.0, cfg);
  const auto ils = energy_report(two_on, powers, 24.0, cfg);
  o.detail << "baseline=" << format_exact(ils.baseline_wh) << " ils=" << format_exact(ils.ils_wh)
           << " saving=" << format_fixed(ils.saving_fraction, 6);
  o.check(powers.size() == 8, "8 luminaires");
  o.check(std::abs(full.baseline_wh - 18585.6) < 1e-9, "baseline 18585.6");
  o.check(std::abs(ils.ils_wh - 6206.4) < 1e-9, "ils 6206.4");
  o.check(std::abs(ils.saving_fraction - 0.6661) <= 1e-4, "saving 0.6661");
}

void ac2(Outcome& o) {
  const auto powers = test::load_room8().powers();
  const IlsConfig cfg;
  const double expect[] = {193.6, 387.2, 580.8};
  for (int k = 0; k < 3; ++k) {
    const int off = 2 * (k + 1);
    std::vector<double> d(powers.size(), 1.0);
    for (int l = 0; l < off; ++l) d[static_cast<std::size_t>(l)] = 0.0;
    const double dw = energy_report(d, powers, 24.0, cfg).delta_watt;
    o.detail << ' ' << off << "off=" << format_exact(dw);
    o.check(dw == expect[k], std::to_string(off) + " off");
  }
}

void ac3(Outcome& o) {
  int scenes = 0, binary_ok = 0;
  double worst_slack = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto room = test::random_room(seed, 8, 3);
    const Scene& s = room.scene;
    const auto accel = build_accel(s.patches);
    BasisOptions bo;
    bo.occlusion = false;  // empty convex box
    const auto model = build_radiosity(s, accel, bo);
    const std::size_t rays = 2000;
    const auto occ = contribution_matrix(s, model.basis, accel, rays);
    const auto powers = s.powers();
    OptimizeContext ctx;
    for (const auto& l : s.luminaires) ctx.luminaire_ids.push_back(l.id);

    IlsConfig cfg;
    cfg.delta_max_lux = room.delta_max;
    const auto best = optimize(occ, powers, cfg, ctx);
    const auto oracle = test::brute_force_binary(occ.A, powers, room.delta_max);
    double oracle_power = 0.0;
    for (std::size_t l = 0; l < powers.size(); ++l) oracle_power += powers[l] * (*oracle)[l];
    const bool same = oracle && best.dims == *oracle && std::abs(best.power_watts - oracle_power) < 1e-9;
    binary_ok += same ? 1 : 0;
    if (!same) o.check(false, "binary seed " + std::to_string(seed));

    cfg.mode = IlsMode::continuous;
    const auto cont = optimize(occ, powers, cfg, ctx);
    for (const auto* dims : {&best.dims, &cont.dims}) {
      const auto r = evaluate_scenario(s, model.basis, *dims, {}, accel, rays, cfg);
      for (const auto& [id, drop] : r.delta_lux) {
        worst_slack = std::max(worst_slack, drop - room.delta_max);
        if (drop > room.delta_max + 1e-6) o.check(false, "budget seed " + std::to_string(seed));
      }
    }
    ++scenes;
  }
  o.detail << "scenes=" << scenes << " binary_matches=" << binary_ok << " worst_drop_minus_budget="
           << format_fixed(worst_slack, 9);
}

void ac4(Outcome& o) {
  {
    FormFactorMatrix ff{(Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished(), Eigen::VectorXd::Ones(2)};
    const std::vector<double> rho{0.5, 0.5};
    const auto b = RadiositySolver(ff, rho).solve(Eigen::Vector2d(100, 0)).exitance;
    o.detail << "two_patch=(" << format_fixed(b[0], 6) << ',' << format_fixed(b[1], 6) << ')';
    o.check(std::abs(b[0] - 200.0 / 3.0) < 1e-6 && std::abs(b[1] - 100.0 / 3.0) < 1e-6, "two-patch");
  }
  {
    const auto patches = test::closed_box(1, 1, 1, 0.25, 0.5);
    const auto ff = form_factor_matrix(patches, build_accel(patches), 16);
    const auto n = ff.F.rows();
    double lo = 2.0, hi = 0.0, recip = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      lo = std::min(lo, ff.F.row(i).sum());
      hi = std::max(hi, ff.F.row(i).sum());
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = ff.areas[i] * ff.F(i, j), b = ff.areas[j] * ff.F(j, i);
        if (std::max(a, b) > 0.0) recip = std::max(recip, std::abs(a - b) / std::max(a, b));
      }
    }
    const auto sol = RadiositySolver(ff, albedos(patches)).solve(Eigen::VectorXd::Constant(n, 100.0));
    const double spread = (sol.exitance.maxCoeff() - sol.exitance.minCoeff()) / sol.exitance.maxCoeff();
    o.detail << " cube_rows=[" << format_fixed(lo, 4) << ',' << format_fixed(hi, 4) << "] cube_spread="
             << format_fixed(spread, 4) << " reciprocity=" << recip;
    o.check(lo >= 0.97 && hi <= 1.001, "row sums");
    o.check(spread <= 0.02, "uniform B");
    o.check(recip <= 1e-6, "reciprocity");
  }
  {
    const Scene s = with_occupant_bodies(test::load_room8());
    const auto accel = build_accel(s.patches);
    const auto model = build_radiosity(s, accel);
    const auto rho = albedos(s.patches);
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 24; ++k) {
      std::vector<double> d(s.luminaires.size());
      for (auto& x : d) x = u(rng);
      const auto direct = solve_radiosity(model.form_factors, rho, emission_vector(s, d, accel)).exitance;
      worst = std::max(worst, rel(model.basis.combine_exitance(d), direct));
    }
    o.detail << " superposition=" << worst;
    o.check(worst < 1e-8, "superposition");
  }
}

void ac5(Outcome& o) {
  Scene box;
  box.patches = test::closed_box(2, 2, 2, 0.5, 0.5);
  const auto accel = build_accel(box.patches);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(box.patches.size()), 500.0);
  const auto lsc = LuxmeterSensitivityCurve::cosine();
  const double enclosure = virtual_luxmeter(box, b, {{1, 1, 1}, Vec3::UnitZ()}, lsc, {}, accel, 100000).total;

  Scene lamp;
  lamp.luminaires.push_back(test::point_light(1, {0, 0, 2}, 1000.0));
  const AccelIndex empty(std::vector<Patch>{});
  const std::vector<double> on{1.0};
  const double axis = virtual_luxmeter(lamp, Eigen::VectorXd(), {Vec3::Zero(), Vec3::UnitZ()}, lsc, on, empty, 1000)
                          .total;
  o.detail << "enclosure=" << format_fixed(enclosure, 4) << " on_axis=" << format_exact(axis);
  o.check(std::abs(enclosure - 500.0) <= 0.02 * 500.0, "enclosure");
  o.check(std::abs(axis - 250.0) <= 1e-9, "on-axis");
}

void ac6(Outcome& o) {
  const auto patches = with_occupant_bodies(test::load_room8()).patches;
  const auto accel = build_accel(patches);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> x(0.0, 6.0), y(0.0, 4.0), z(0.0, 3.0);
  int mismatches = 0, hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const Ray ray{{x(rng), y(rng), z(rng)}, test::random_unit(rng)};
    const auto a = accel.cast_ray(ray);
    const auto b = test::linear_cast(patches, ray, accel.ray_epsilon());
    const bool same = a.has_value() == b.has_value() &&
                      (!a || (a->patch_id == b->patch_id && std::abs(a->t - b->t) < 1e-9));
    mismatches += same ? 0 : 1;
    hits += a ? 1 : 0;
  }
  o.detail << "patches=" << patches.size() << " rays=10000 hits=" << hits << " mismatches=" << mismatches;
  o.check(patches.size() <= 500, "patch count");
  o.check(mismatches == 0, "bvh vs linear scan");
}

void ac7(Outcome& o) {
  const Scene s = with_occupant_bodies(test::load_room8());
  const auto accel = build_accel(s.patches);
  const auto model = build_radiosity(s, accel);
  const IlsConfig cfg;
  const auto dims = s.dims();
  const auto own = evaluate_scenario(s, model.basis, dims, {}, accel, 10000, cfg);
  const auto again = evaluate_scenario(s, model.basis, dims, own.sensor_lux, accel, 10000, cfg);
  double worst = 0.0;
  for (const auto& [id, e] : again.epsilon_est) worst = std::max(worst, e);
  o.detail << "sensors=" << again.epsilon_est.size() << " max_epsilon=" << worst
           << " (recorded-dataset figures not reproducible)";
  o.check(!again.epsilon_est.empty() && again.epsilon_est.size() == s.sensors.size(), "all sensors compared");
  o.check(worst == 0.0, "self-consistency");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::string& err_text) {
  std::vector<const char*> argv{"ilsctl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  err_text = err.str();
  return code;
}

void ac8(Outcome& o) {
  const auto root = fs::temp_directory_path() / ("ils_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const auto scene = (test::kRoom8Dir / "scene.json").string();
  std::size_t compared = 0;
  for (const std::string threads : {"1", "8"}) {
    for (const std::string cmd : {"solve", "optimize"}) {
      std::string err;
      const auto out = (root / threads / cmd).string();
      const int code = run_cli({cmd, "--scene", scene, "--threads", threads, "--out", out}, err);
      o.check(code == 0, cmd + " --threads " + threads + ": " + err);
    }
  }
  for (const std::string cmd : {"solve", "optimize"}) {
    for (const auto& e : fs::directory_iterator(root / "1" / cmd)) {
      const auto other = root / "8" / cmd / e.path().filename();
      o.check(fs::exists(other) && slurp(e.path()) == slurp(other), cmd + "/" + e.path().filename().string());
      ++compared;
    }
  }
  o.check(compared == 6, "six artifacts");
  o.detail << "artifacts_compared=" << compared;
  fs::remove_all(root);
}

}  // namespace
}  // namespace ils

int main() {
  const std::pair<const char*, void (*)(ils::Outcome&)> criteria[] = {
      {"AC1 energy arithmetic", ils::ac1},      {"AC2 delta-watt column", ils::ac2},
      {"AC3 budget soundness", ils::ac3},       {"AC4 radiosity correctness", ils::ac4},
      {"AC5 luxmeter calibration", ils::ac5},   {"AC6 visibility oracle", ils::ac6},
      {"AC7 self-consistency", ils::ac7},       {"AC8 determinism", ils::ac8},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    ils::Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << ']';
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << name << ": " << (o.pass ? "PASS" : "FAIL") << " (" << ils::format_fixed(secs, 2) << " s) "
              << o.detail.str() << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
