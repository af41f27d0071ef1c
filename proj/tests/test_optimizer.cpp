// SPDX-License-Identifier: Apache-2.0
#include "ils/optimizer.hpp"

#include "ils/perception.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace ils {
namespace {

ContributionMatrix matrix(const Eigen::MatrixXd& A) {
  ContributionMatrix m;
  m.A = A;
  m.full_lit = A.rowwise().sum();
  for (Eigen::Index k = 0; k < A.rows(); ++k) m.row_ids.push_back(static_cast<int>(k) + 1);
  return m;
}

IlsConfig config(double delta, IlsMode mode = IlsMode::binary) {
  IlsConfig c;
  c.delta_max_lux = delta;
  c.mode = mode;
  return c;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index k, Eigen::Index l) {
  std::uniform_real_distribution<double> u(0.0, 150.0);
  Eigen::MatrixXd A(k, l);
  for (auto& x : A.reshaped()) x = u(rng) * (u(rng) < 30.0 ? 0.0 : 1.0);
  return A;
}

std::vector<double> random_powers(std::mt19937_64& rng, std::size_t l) {
  const double menu[] = {20.0, 40.0, 40.0, 60.0, 96.8};
  std::vector<double> p(l);
  for (auto& x : p) x = menu[std::uniform_int_distribution<int>(0, 4)(rng)];
  return p;
}

TEST(Binary, SingleOccupantTwoLuminaires) {
  const std::vector<double> powers{50.0, 50.0};
  const auto opt = optimize(matrix((Eigen::MatrixXd(1, 2) << 300, 50).finished()), powers, config(200));
  EXPECT_EQ(opt.dims, (std::vector<double>{1.0, 0.0}));
  EXPECT_DOUBLE_EQ(opt.power_watts, 50.0);
}

TEST(Binary, ZeroBudgetKeepsEverythingOn) {
  std::mt19937_64 rng(1);
  const auto A = random_matrix(rng, 2, 5);
  const std::vector<double> powers(5, 10.0);
  const auto opt = optimize(matrix(A + Eigen::MatrixXd::Constant(2, 5, 1.0)), powers, config(0));
  EXPECT_EQ(opt.dims, std::vector<double>(5, 1.0));
}

TEST(Binary, EqualPowerTiesSwitchOffLowerIdsFirst) {
  const std::vector<double> powers{10.0, 10.0, 10.0};
  const auto opt = optimize(matrix((Eigen::MatrixXd(1, 3) << 100, 100, 100).finished()), powers, config(150));
  EXPECT_EQ(opt.dims, (std::vector<double>{0.0, 1.0, 1.0}));
  OptimizeContext ctx;
  ctx.luminaire_ids = {9, 4, 7};
  const auto by_id = optimize(matrix((Eigen::MatrixXd(1, 3) << 100, 100, 100).finished()), powers, config(150), ctx);
  EXPECT_EQ(by_id.dims, (std::vector<double>{1.0, 0.0, 1.0}));
}

TEST(Binary, RefusesMoreThanSixteenLuminaires) {
  const std::vector<double> powers(17, 1.0);
  EXPECT_THROW(optimize(matrix(Eigen::MatrixXd::Zero(1, 17)), powers, config(10)), InvariantError);
}

TEST(BinaryProperty, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 300; ++rep) {
    const auto L = std::uniform_int_distribution<Eigen::Index>(1, 8)(rng);
    const auto K = std::uniform_int_distribution<Eigen::Index>(1, 3)(rng);
    const auto A = random_matrix(rng, K, L);
    const auto powers = random_powers(rng, static_cast<std::size_t>(L));
    const double delta = std::uniform_real_distribution<double>(0.0, 300.0)(rng);
    const auto expect = test::brute_force_binary(A, powers, delta);
    ASSERT_TRUE(expect);  // all-on is always feasible
    const auto got = optimize(matrix(A), powers, config(delta));
    EXPECT_EQ(got.dims, *expect) << "rep " << rep;
    double p = 0.0;
    for (std::size_t l = 0; l < powers.size(); ++l) p += powers[l] * (*expect)[l];
    EXPECT_NEAR(got.power_watts, p, 1e-9);
  }
}

TEST(BinaryProperty, MonotoneInBudgetAndScaleFree) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const auto A = random_matrix(rng, 2, 6);
    const auto powers = random_powers(rng, 6);
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {0.0, 25.0, 50.0, 100.0, 200.0, 400.0, 1e4}) {
      const auto opt = optimize(matrix(A), powers, config(delta));
      EXPECT_LE(opt.power_watts, prev + 1e-9);
      prev = opt.power_watts;
    }
    std::vector<double> scaled = powers;
    for (auto& p : scaled) p *= 3.5;
    const auto base = optimize(matrix(A), powers, config(120));
    const auto big = optimize(matrix(A), scaled, config(120));
    EXPECT_EQ(big.dims, base.dims);
    EXPECT_NEAR(big.power_watts, 3.5 * base.power_watts, 1e-9);
  }
}

TEST(Continuous, SingleOccupantMatchesFractionalKnapsack) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(1.0, 200.0), w(5.0, 100.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int L = 6;
    Eigen::MatrixXd A(1, L);
    std::vector<double> powers(L);
    for (int l = 0; l < L; ++l) {
      A(0, l) = a(rng);
      powers[static_cast<std::size_t>(l)] = w(rng);
    }
    const double delta = std::uniform_real_distribution<double>(0.0, 600.0)(rng);
    // Greedy: switch off in order of watts saved per lux lost.
    std::vector<int> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return powers[static_cast<std::size_t>(x)] / A(0, x) > powers[static_cast<std::size_t>(y)] / A(0, y);
    });
    double budget = delta, saved = 0.0;
    for (int l : order) {
      const double x = std::min(1.0, budget / A(0, l));
      saved += x * powers[static_cast<std::size_t>(l)];
      budget -= x * A(0, l);
      if (budget <= 0.0) break;
    }
    const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
    const auto opt = optimize(matrix(A), powers, config(delta, IlsMode::continuous));
    EXPECT_NEAR(opt.power_watts, total - saved, 1e-6 * total);
    EXPECT_LE(matrix(A).drop(opt.dims)[0], delta + 1e-6);
  }
}

TEST(ContinuousProperty, SoundAndNeverWorseThanBinary) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 150; ++rep) {
    const auto L = std::uniform_int_distribution<Eigen::Index>(1, 8)(rng);
    const auto A = random_matrix(rng, 3, L);
    const auto powers = random_powers(rng, static_cast<std::size_t>(L));
    const double delta = std::uniform_real_distribution<double>(0.0, 300.0)(rng);
    const auto cont = optimize(matrix(A), powers, config(delta, IlsMode::continuous));
    const auto bin = optimize(matrix(A), powers, config(delta));
    EXPECT_LE(cont.power_watts, bin.power_watts + 1e-6);
    const Eigen::VectorXd drop = matrix(A).drop(cont.dims);
    EXPECT_LE(drop.maxCoeff(), delta + 1e-6);
    for (double d : cont.dims) {
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
    }
  }
}

TEST(Simplex, SmallProgram) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), objective 36.
  const Eigen::MatrixXd M = (Eigen::MatrixXd(3, 2) << 1, 0, 0, 2, 3, 2).finished();
  const auto x = simplex_max(M, Eigen::Vector3d(4, 12, 18), Eigen::Vector2d(3, 5));
  EXPECT_NEAR(x[0], 2.0, 1e-12);
  EXPECT_NEAR(x[1], 6.0, 1e-12);
  EXPECT_THROW(simplex_max(M, Eigen::Vector3d(-1, 12, 18), Eigen::Vector2d(3, 5)), InvariantError);
  EXPECT_THROW(simplex_max(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)),
               NumericError);
}

TEST(Vfoa, DimsFollowTheMaskOrReportTheOccupant) {
  const auto A = (Eigen::MatrixXd(2, 3) << 10, 100, 5, 300, 10, 10).finished();
  const std::vector<double> powers{10, 20, 30};
  OptimizeContext ctx;
  ctx.in_vfoa = {true, true, false};
  const auto opt = optimize(matrix(A), powers, config(200, IlsMode::vfoa_gated), ctx);
  EXPECT_EQ(opt.dims, (std::vector<double>{1.0, 1.0, 0.0}));
  EXPECT_DOUBLE_EQ(opt.power_watts, 30.0);

  ctx.in_vfoa = {false, true, true};
  try {
    optimize(matrix(A), powers, config(200, IlsMode::vfoa_gated), ctx);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("occupant 2"), std::string::npos) << e.what();
  }
  ctx.in_vfoa = {true};
  EXPECT_THROW(optimize(matrix(A), powers, config(200, IlsMode::vfoa_gated), ctx), InvariantError);
}

TEST(SpatialFloor, ConstrainsTheChoice) {
  const auto occ = matrix((Eigen::MatrixXd(1, 2) << 10, 10).finished());
  const auto spatial = matrix((Eigen::MatrixXd(1, 2) << 300, 100).finished());
  const std::vector<double> powers{50, 40};
  IlsConfig cfg = config(100);
  EXPECT_EQ(optimize(occ, powers, cfg).dims, (std::vector<double>{0.0, 0.0}));
  cfg.spatial_floor_lux = 250.0;
  EXPECT_THROW(optimize(occ, powers, cfg), InvariantError);  // floor without sensor rows
  OptimizeContext ctx;
  ctx.spatial = &spatial;
  EXPECT_EQ(optimize(occ, powers, cfg, ctx).dims, (std::vector<double>{1.0, 0.0}));
  cfg.mode = IlsMode::continuous;
  const auto cont = optimize(occ, powers, cfg, ctx);
  EXPECT_GE((spatial.A * Eigen::Vector2d(cont.dims[0], cont.dims[1]))[0], 250.0 - 1e-6);
  cfg.spatial_floor_lux = 1000.0;
  EXPECT_THROW(optimize(occ, powers, cfg, ctx), InfeasibleError);
  cfg.mode = IlsMode::binary;
  EXPECT_THROW(optimize(occ, powers, cfg, ctx), InfeasibleError);
}

TEST(Optimize, ValidatesInputs) {
  const auto m = matrix(Eigen::MatrixXd::Ones(1, 2));
  const std::vector<double> one{1.0}, neg{1.0, -1.0}, ok{1.0, 1.0};
  EXPECT_THROW(optimize(m, one, config(10)), InvariantError);
  EXPECT_THROW(optimize(m, neg, config(10)), InvariantError);
  EXPECT_THROW(optimize(m, ok, config(-1)), InvariantError);
  EXPECT_EQ(parse_mode("continuous"), IlsMode::continuous);
  EXPECT_EQ(parse_mode("vfoa"), IlsMode::vfoa_gated);
  EXPECT_THROW(parse_mode("greedy"), InvariantError);
}

TEST(Energy, EightLuminaireRoomFigures) {
  const std::vector<double> powers(8, 96.8);
  const std::vector<double> two_on{0, 0, 1, 0, 0, 0, 1, 0};
  const auto r = energy_report(two_on, powers, 24.0, IlsConfig{});
  EXPECT_NEAR(r.baseline_wh, 18585.6, 1e-9);
  EXPECT_NEAR(r.ils_wh, 6206.4, 1e-9);
  EXPECT_NEAR(r.saving_fraction, 0.6661, 1e-4);
  EXPECT_NEAR(r.saving_fraction, 0.6660640495867768, 1e-12);
}

TEST(Energy, DeltaWattForSwitchedOffCounts) {
  const std::vector<double> powers(8, 96.8);
  const double expect[] = {193.6, 387.2, 580.8};
  for (int i = 0; i < 3; ++i) {
    std::vector<double> d(8, 1.0);
    for (int l = 0; l < 2 * (i + 1); ++l) d[static_cast<std::size_t>(l)] = 0.0;
    EXPECT_EQ(energy_report(d, powers, 24.0, IlsConfig{}).delta_watt, expect[i]);
  }
}

TEST(EnergyProperty, SavedPlusUsedIsTotal) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto powers = random_powers(rng, 8);
    std::vector<double> d(8);
    for (auto& x : d) x = u(rng);
    const auto r = energy_report(d, powers, 24.0, IlsConfig{});
    double used = 0.0, total = 0.0;
    for (std::size_t l = 0; l < 8; ++l) {
      used += powers[l] * d[l];
      total += powers[l];
    }
    EXPECT_NEAR(r.delta_watt + used, total, 1e-9);
  }
  EXPECT_THROW(energy_report(std::vector<double>{1.0}, std::vector<double>{1.0}, 0.0, IlsConfig{}), InvariantError);
}

class Room : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto r = test::random_room(1234, 5, 2);
    r.scene.sensors.push_back({1, {1.0, 1.0, 0.8}, Vec3::UnitZ(), LuxmeterSensitivityCurve::cosine()});
    r.scene.sensors.push_back(
        {2, {2.0, 1.0, 1.2}, Vec3::UnitX(), LuxmeterSensitivityCurve::cosine(), SensorRole::gaze});
    scene_ = std::make_unique<Scene>(r.scene);
    accel_ = std::make_unique<AccelIndex>(build_accel(scene_->patches));
    model_ = std::make_unique<RadiosityModel>(build_radiosity(*scene_, *accel_));
  }
  static void TearDownTestSuite() {
    model_.reset();
    accel_.reset();
    scene_.reset();
  }
  static inline std::unique_ptr<Scene> scene_;
  static inline std::unique_ptr<AccelIndex> accel_;
  static inline std::unique_ptr<RadiosityModel> model_;
};

TEST_F(Room, ContributionColumnsAreSingleLuminaireReadings) {
  const auto m = contribution_matrix(*scene_, model_->basis, *accel_, 3000);
  ASSERT_EQ(m.A.rows(), static_cast<Eigen::Index>(scene_->occupants.size()));
  EXPECT_LE((m.full_lit - m.A.rowwise().sum()).norm(), 1e-9 * m.full_lit.norm());
  const std::size_t L = scene_->luminaires.size();
  for (std::size_t k = 0; k < scene_->occupants.size(); ++k) {
    const auto& o = scene_->occupants[k];
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> d(L, 0.0);
      d[l] = 1.0;
      const double r = virtual_luxmeter(*scene_, model_->basis, {o.head_position, o.gaze}, o.lsc, d, *accel_, 3000).total;
      EXPECT_NEAR(m.A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)), r, 1e-12 * std::max(1.0, r));
    }
  }
  const auto spatial = sensor_contribution_matrix(*scene_, model_->basis, *accel_, 3000, SensorRole::spatial);
  EXPECT_EQ(spatial.row_ids, std::vector<int>{1});
}

TEST_F(Room, EvaluateAgainstEngineGroundTruth) {
  const std::vector<double> ones(scene_->luminaires.size(), 1.0);
  const auto cfg = config(200);
  const auto truth = evaluate_scenario(*scene_, model_->basis, ones, {}, *accel_, 3000, cfg);
  std::map<int, double> gt, shifted;
  for (const auto& [id, lux] : truth.sensor_lux) {
    gt[id] = lux;
    shifted[id] = lux + 10.0;
  }
  const auto self = evaluate_scenario(*scene_, model_->basis, ones, gt, *accel_, 3000, cfg);
  for (const auto& [id, eps] : self.epsilon_est) EXPECT_EQ(eps, 0.0) << id;
  EXPECT_EQ(self.epsilon_est.size(), scene_->sensors.size());
  for (const auto& [id, d] : self.delta_lux) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(self.delta_watt, 0.0);

  const auto off = evaluate_scenario(*scene_, model_->basis, ones, shifted, *accel_, 3000, cfg);
  for (const auto& [id, eps] : off.epsilon_est) EXPECT_NEAR(eps, 10.0, 1e-9);

  EXPECT_THROW(evaluate_scenario(*scene_, model_->basis, ones, {{99, 1.0}}, *accel_, 3000, cfg), InvariantError);
}

TEST_F(Room, OptimizedDimsRespectTheBudgetWhenReRead) {
  const auto m = contribution_matrix(*scene_, model_->basis, *accel_, 3000);
  const auto powers = scene_->powers();
  for (IlsMode mode : {IlsMode::binary, IlsMode::continuous}) {
    const auto opt = optimize(m, powers, config(60.0, mode));
    const auto res = evaluate_scenario(*scene_, model_->basis, opt.dims, {}, *accel_, 3000, config(60.0, mode));
    for (const auto& [id, drop] : res.delta_lux) EXPECT_LE(drop, 60.0 + 1e-6) << "occupant " << id;
  }
}

TEST(GroundTruthCsv, HeaderOptionalAndErrorsLocated) {
  EXPECT_EQ(parse_ground_truth_csv("sensor_id,lux\n1,495.3\n2, 473.5\n"),
            (std::map<int, double>{{1, 495.3}, {2, 473.5}}));
  EXPECT_EQ(parse_ground_truth_csv("# c\n3,1\n").at(3), 1.0);
  try {
    parse_ground_truth_csv("1,2\n2,x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_ground_truth_csv("1,2\n1,3\n"), ParseError);
}

}  // namespace
}  // namespace ils
