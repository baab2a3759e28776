#include "iga/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace {

using iga::element_quadrature;
using iga::gauss_rule;
using iga::make_open_uniform_knots;
using iga::make_tensor_space;

TEST(GaussRule, MidpointRule) {
  const auto r = gauss_rule(1);
  ASSERT_EQ(r.points, 1);
  EXPECT_NEAR(r.nodes[0], 0.5, 1e-15);
  EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
}

TEST(GaussRule, TwoPointNodes) {
  const auto r = gauss_rule(2);
  EXPECT_NEAR(r.nodes[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.nodes[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
}

TEST(GaussRule, WeightsSumToOne) {
  for (int m = 1; m <= 10; ++m) {
    const auto r = gauss_rule(m);
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-14) << "m=" << m;
  }
}

TEST(GaussRule, FivePointsIntegrateDegreeNine) {
  const auto r = gauss_rule(5);
  double s = 0.0;
  for (int k = 0; k < 5; ++k) s += r.weights[k] * std::pow(r.nodes[k], 9);
  EXPECT_NEAR(s, 0.1, 1e-14);
}

TEST(GaussRule, ExactForPolynomialsUpToTwoMMinusOne) {
  for (int m = 1; m <= 8; ++m) {
    const auto r = gauss_rule(m);
    for (int deg = 0; deg <= 2 * m - 1; ++deg) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += r.weights[k] * std::pow(r.nodes[k], deg);
      EXPECT_NEAR(s, 1.0 / (deg + 1), 1e-13) << "m=" << m << " deg=" << deg;
    }
  }
}

TEST(GaussRule, RejectsOutOfRangeCounts) {
  EXPECT_THROW(gauss_rule(0), std::invalid_argument);
  EXPECT_THROW(gauss_rule(11), std::invalid_argument);
}

TEST(ElementQuadrature, SinglePointElement) {
  const auto space = make_tensor_space(2, make_open_uniform_knots(1, 2));
  const int elem[2] = {0, 0};
  const auto q = element_quadrature(space, elem, gauss_rule(1));
  ASSERT_EQ(q.weights.size(), 1u);
  EXPECT_NEAR(q.points[0], 0.25, 1e-15);
  EXPECT_NEAR(q.points[1], 0.25, 1e-15);
  EXPECT_NEAR(q.weights[0], 0.25, 1e-15);
}

TEST(ElementQuadrature, WeightsSumToElementMeasure) {
  const auto space = make_tensor_space(3, make_open_uniform_knots(2, 5));
  const auto rule = gauss_rule(3);
  const int elem[3] = {1, 4, 2};
  const auto q = element_quadrature(space, elem, rule);
  double s = 0.0;
  for (double w : q.weights) s += w;
  EXPECT_NEAR(s, std::pow(space.kv.spacing, 3), 1e-14);
}

TEST(ElementQuadrature, ElementsTileTheUnitSquare) {
  const auto space = make_tensor_space(2, make_open_uniform_knots(2, 4));
  const auto rule = gauss_rule(2);
  double total = 0.0;
  for (int e1 = 0; e1 < 4; ++e1)
    for (int e0 = 0; e0 < 4; ++e0) {
      const int elem[2] = {e0, e1};
      const auto q = element_quadrature(space, elem, rule);
      for (double w : q.weights) total += w;
    }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(ElementQuadrature, RejectsInvalidElement) {
  const auto space = make_tensor_space(2, make_open_uniform_knots(2, 4));
  const int elem[2] = {4, 0};
  EXPECT_THROW(element_quadrature(space, elem, gauss_rule(2)), std::invalid_argument);
}

}  // namespace
