// SPDX-License-Identifier: Apache-2.0
#include "ils/photometry.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ils {
namespace {

LightDistributionCurve two_node_table() {
  LightDistributionCurve ldc;
  ldc.name = "t";
  ldc.polar_deg = {0.0, 60.0};
  ldc.azimuth_deg = {0.0};
  ldc.candela = {{1000.0, 400.0}};
  return ldc;
}

LightDistributionCurve random_table(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cd(0.0, 2000.0);
  LightDistributionCurve ldc;
  ldc.name = "r";
  ldc.polar_deg = {0.0, 15.0, 40.0, 75.0, 90.0, 135.0, 180.0};
  ldc.azimuth_deg = {0.0, 45.0, 90.0, 200.0, 300.0};
  for (std::size_t c = 0; c < ldc.azimuth_deg.size(); ++c) {
    std::vector<double> row;
    for (std::size_t g = 0; g < ldc.polar_deg.size(); ++g) row.push_back(cd(rng));
    ldc.candela.push_back(row);
  }
  ldc.validate();
  return ldc;
}

TEST(Ldc, IsotropicSourceSpreadsFluxEvenly) {
  const auto ldc = LightDistributionCurve::isotropic(1000.0);
  for (double gamma : {0.0, 33.0, 90.0, 151.0, 180.0}) {
    for (double c : {0.0, 100.0, 359.0}) {
      EXPECT_NEAR(eval_ldc_angles(ldc, c, gamma), 79.577, 1e-3);
    }
  }
  EXPECT_DOUBLE_EQ(eval_ldc(ldc, Vec3(0.3, -0.2, 0.9).normalized()), 1000.0 / (4.0 * kPi));
}

TEST(Ldc, InterpolatesLinearlyInPolarAngle) {
  const auto ldc = two_node_table();
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 0.0, 0.0), 1000.0);
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 0.0, 60.0), 400.0);
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 0.0, 30.0), 700.0);
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 0.0, 75.0), 0.0);  // past the last row
}

TEST(Ldc, NadirIsMinusZ) {
  const auto ldc = two_node_table();
  EXPECT_DOUBLE_EQ(eval_ldc(ldc, -Vec3::UnitZ()), 1000.0);
  EXPECT_DOUBLE_EQ(eval_ldc(ldc, Vec3::UnitZ()), 0.0);
}

TEST(Ldc, InterpolatesAcrossTheAzimuthWrap) {
  LightDistributionCurve ldc;
  ldc.name = "w";
  ldc.polar_deg = {0.0, 90.0};
  ldc.azimuth_deg = {0.0, 90.0, 270.0};
  ldc.candela = {{100.0, 100.0}, {200.0, 200.0}, {300.0, 300.0}};
  ldc.validate();
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 45.0, 10.0), 150.0);
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 180.0, 10.0), 250.0);
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, 315.0, 10.0), 200.0);  // between 270 and 360 = 0
  EXPECT_DOUBLE_EQ(eval_ldc_angles(ldc, -45.0, 10.0), 200.0);
}

TEST(LdcProperty, NodesAreReproducedExactly) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ldc = random_table(rng);
    for (std::size_t c = 0; c < ldc.azimuth_deg.size(); ++c) {
      for (std::size_t g = 0; g < ldc.polar_deg.size(); ++g) {
        EXPECT_EQ(eval_ldc_angles(ldc, ldc.azimuth_deg[c], ldc.polar_deg[g]), ldc.candela[c][g]);
      }
    }
  }
}

TEST(LdcProperty, AzimuthIsPeriodic) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0.0, 360.0), pol(0.0, 180.0);
  const auto ldc = random_table(rng);
  for (int i = 0; i < 2000; ++i) {
    const double c = ang(rng), g = pol(rng);
    const double base = eval_ldc_angles(ldc, c, g);
    EXPECT_NEAR(eval_ldc_angles(ldc, c + 360.0, g), base, 1e-9 * (1.0 + base));
    EXPECT_NEAR(eval_ldc_angles(ldc, c - 720.0, g), base, 1e-9 * (1.0 + base));
  }
}

TEST(LdcProperty, ValuesStayWithinBracketingNodes) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto ldc = random_table(rng);
  for (std::size_t c = 0; c < ldc.azimuth_deg.size(); ++c) {
    for (std::size_t g = 0; g + 1 < ldc.polar_deg.size(); ++g) {
      const double lo = std::min(ldc.candela[c][g], ldc.candela[c][g + 1]);
      const double hi = std::max(ldc.candela[c][g], ldc.candela[c][g + 1]);
      for (int k = 0; k < 10; ++k) {
        const double gamma = ldc.polar_deg[g] + u(rng) * (ldc.polar_deg[g + 1] - ldc.polar_deg[g]);
        const double v = eval_ldc_angles(ldc, ldc.azimuth_deg[c], gamma);
        EXPECT_GE(v, lo - 1e-9);
        EXPECT_LE(v, hi + 1e-9);
      }
    }
  }
}

TEST(Ldc, ValidationRejectsBrokenTables) {
  auto ldc = two_node_table();
  ldc.polar_deg = {5.0, 60.0};
  EXPECT_THROW(ldc.validate(), InvariantError);
  ldc = two_node_table();
  ldc.polar_deg = {0.0, 0.0};
  EXPECT_THROW(ldc.validate(), InvariantError);
  ldc = two_node_table();
  ldc.candela[0][1] = -1.0;
  EXPECT_THROW(ldc.validate(), InvariantError);
  ldc = two_node_table();
  ldc.azimuth_deg = {360.0};
  EXPECT_THROW(ldc.validate(), InvariantError);
  ldc = two_node_table();
  ldc.candela[0].pop_back();
  EXPECT_THROW(ldc.validate(), InvariantError);
}

TEST(Ldc, CsvRoundTripIsExact) {
  std::mt19937_64 rng(3);
  const auto ldc = random_table(rng);
  const auto back = parse_ldc_csv(format_ldc_csv(ldc), "r");
  EXPECT_EQ(back, ldc);
}

TEST(Ldc, CsvErrorsCarryTheLine) {
  const std::string text = "gamma,0,90\n0,10,20\n90,10,abc\n";
  try {
    parse_ldc_csv(text, "bad");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Lsc, CosineNodes) {
  const auto lsc = LuxmeterSensitivityCurve::cosine();
  EXPECT_EQ(eval_lsc(lsc, 0.0), 1.0);
  EXPECT_NEAR(eval_lsc(lsc, 60.0), 0.5, 1e-12);
  EXPECT_EQ(eval_lsc(lsc, 90.0), 0.0);
  EXPECT_EQ(eval_lsc(lsc, 95.0), 0.0);
  EXPECT_EQ(eval_lsc(lsc, -1.0), 0.0);
}

TEST(LscProperty, MonotoneBetweenMonotoneNodes) {
  const auto lsc = LuxmeterSensitivityCurve::cosine(7.5);
  double prev = 1.0;
  for (double a = 0.0; a < 90.0; a += 0.05) {
    const double w = eval_lsc(lsc, a);
    EXPECT_LE(w, prev + 1e-15);
    EXPECT_GE(w, 0.0);
    prev = w;
  }
}

TEST(Lsc, ValidationRejectsBrokenCurves) {
  LuxmeterSensitivityCurve lsc{"x", {0.0, 45.0}, {0.9, 0.5}};
  EXPECT_THROW(lsc.validate(), InvariantError);
  lsc = {"x", {0.0, 100.0}, {1.0, 0.5}};
  EXPECT_THROW(lsc.validate(), InvariantError);
  lsc = {"x", {0.0, 45.0}, {1.0, 1.5}};
  EXPECT_THROW(lsc.validate(), InvariantError);
  lsc = {"x", {0.0, 45.0, 30.0}, {1.0, 0.5, 0.2}};
  EXPECT_THROW(lsc.validate(), InvariantError);
}

TEST(Lsc, CsvRoundTripIsExact) {
  const auto lsc = LuxmeterSensitivityCurve::cosine(2.5, "fine");
  EXPECT_EQ(parse_lsc_csv(format_lsc_csv(lsc), "fine"), lsc);
}

}  // namespace
}  // namespace ils
