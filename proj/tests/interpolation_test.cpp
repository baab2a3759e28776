#include "iga/interpolation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "test_util.hpp"

namespace {

using iga::GridInterpolant;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = a + (b - a) * k / (n - 1);
  return x;
}

std::vector<double> sample_grid(const std::array<std::vector<double>, 3>& coords, int dim,
                                const std::function<double(double, double, double)>& f) {
  std::array<int, 3> sz{1, 1, 1};
  for (int d = 0; d < dim; ++d) sz[d] = static_cast<int>(coords[d].size());
  std::vector<double> v(static_cast<std::size_t>(sz[0]) * sz[1] * sz[2]);
  for (int k = 0; k < sz[2]; ++k)
    for (int j = 0; j < sz[1]; ++j)
      for (int i = 0; i < sz[0]; ++i)
        v[i + static_cast<std::size_t>(sz[0]) * (j + static_cast<std::size_t>(sz[1]) * k)] =
            f(coords[0][i], dim > 1 ? coords[1][j] : 0.0, dim > 2 ? coords[2][k] : 0.0);
  return v;
}

TEST(GridInterpolant, BilinearAverage) {
  std::array<std::vector<double>, 3> coords{{{0.0, 1.0}, {0.0, 1.0}, {}}};
  const GridInterpolant interp(2, coords, {0.0, 1.0, 1.0, 2.0}, 1);
  const double q[2] = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(interp.evaluate(q), 1.0);
}

TEST(GridInterpolant, ConstantDataStaysConstant) {
  for (int q : {1, 3}) {
    std::array<std::vector<double>, 3> coords{
        {linspace(0, 1, 5), linspace(0, 1, 6), linspace(0, 1, 4)}};
    const auto vals = sample_grid(coords, 3, [](double, double, double) { return 3.25; });
    const GridInterpolant interp(3, coords, vals, q);
    for (int k = 0; k < 30; ++k) {
      const double pt[3] = {testutil::uniform(0, 1), testutil::uniform(0, 1),
                            testutil::uniform(0, 1)};
      EXPECT_NEAR(interp.evaluate(pt), 3.25, 1e-13);
    }
  }
}

TEST(GridInterpolant, CubicReproducesCubicPolynomials2D) {
  std::array<std::vector<double>, 3> coords{{linspace(0, 1, 5), linspace(0, 1, 5), {}}};
  const auto f = [](double x, double y, double) { return x * x * x * y * y; };
  const auto vals = sample_grid(coords, 2, f);
  const GridInterpolant interp(2, coords, vals, 3);
  for (int k = 0; k < 100; ++k) {
    const double pt[2] = {testutil::uniform(0, 1), testutil::uniform(0, 1)};
    EXPECT_NEAR(interp.evaluate(pt), f(pt[0], pt[1], 0), 1e-12);
  }
}

TEST(GridInterpolant, CubicReproducesTriCubicPolynomials3D) {
  std::array<std::vector<double>, 3> coords{
      {linspace(0, 1, 5), linspace(0, 1, 4), linspace(0, 1, 6)}};
  const auto f = [](double x, double y, double z) {
    return (2 * x * x * x - x + 1) * (y * y * y + 2 * y * y) * (z * z * z - 3 * z + 2);
  };
  const auto vals = sample_grid(coords, 3, f);
  const GridInterpolant interp(3, coords, vals, 3);
  for (int k = 0; k < 60; ++k) {
    const double pt[3] = {testutil::uniform(0, 1), testutil::uniform(0, 1),
                          testutil::uniform(0, 1)};
    EXPECT_NEAR(interp.evaluate(pt), f(pt[0], pt[1], pt[2]), 1e-12);
  }
}

TEST(GridInterpolant, ExactAtSamplePointsOnRandomGrids) {
  for (int dim : {2, 3}) {
    for (int q : {1, 3}) {
      std::array<std::vector<double>, 3> coords;
      std::array<int, 3> sz{1, 1, 1};
      for (int d = 0; d < dim; ++d) {
        sz[d] = 4 + d;
        coords[d].resize(sz[d]);
        double x = testutil::uniform(0, 0.1);
        for (int k = 0; k < sz[d]; ++k) {
          coords[d][k] = x;
          x += testutil::uniform(0.05, 0.4);
        }
      }
      std::vector<double> vals(static_cast<std::size_t>(sz[0]) * sz[1] * sz[2]);
      for (auto& v : vals) v = testutil::uniform(-5, 5);
      const GridInterpolant interp(dim, coords, vals, q);
      for (int k = 2; k < sz[2]; ++k)
        for (int j = 1; j < sz[1]; ++j)
          for (int i = 0; i < sz[0]; ++i) {
            const double pt[3] = {coords[0][i], dim > 1 ? coords[1][j] : 0,
                                  dim > 2 ? coords[2][k] : 0};
            const std::size_t idx =
                i + static_cast<std::size_t>(sz[0]) *
                        (j + static_cast<std::size_t>(sz[1]) * (dim > 2 ? k : 0));
            EXPECT_EQ(interp.evaluate(pt), vals[idx]) << "dim=" << dim << " q=" << q;
          }
    }
  }
}

TEST(GridInterpolant, LinearDegreeReproducesMultilinearData) {
  std::array<std::vector<double>, 3> coords{{linspace(0, 2, 7), linspace(-1, 1, 5), {}}};
  const auto f = [](double x, double y, double) { return 2.0 * x * y - 3.0 * x + y + 0.5; };
  const auto vals = sample_grid(coords, 2, f);
  const GridInterpolant interp(2, coords, vals, 1);
  for (int k = 0; k < 100; ++k) {
    const double pt[2] = {testutil::uniform(0, 2), testutil::uniform(-1, 1)};
    EXPECT_NEAR(interp.evaluate(pt), f(pt[0], pt[1], 0), 1e-13);
  }
}

TEST(GridInterpolant, LinearDataIsReproducedByBothDegrees) {
  for (int q : {1, 3}) {
    std::array<std::vector<double>, 3> coords{{linspace(0, 1, 6), linspace(0, 1, 6), {}}};
    const auto f = [](double x, double y, double) { return 3.0 * x - 2.0 * y + 0.25; };
    const auto vals = sample_grid(coords, 2, f);
    const GridInterpolant interp(2, coords, vals, q);
    for (int k = 0; k < 50; ++k) {
      const double pt[2] = {testutil::uniform(0, 1), testutil::uniform(0, 1)};
      EXPECT_NEAR(interp.evaluate(pt), f(pt[0], pt[1], 0), 1e-13);
    }
  }
}

TEST(GridInterpolant, SeparableDataMatchesNested1D) {
  std::array<std::vector<double>, 3> coords{{linspace(0, 1, 6), linspace(0, 1, 7), {}}};
  const auto fx = [](double x) { return std::sin(2.0 * x + 0.3); };
  const auto fy = [](double y) { return std::exp(-y) + 0.5 * y; };
  const auto vals = sample_grid(coords, 2, [&](double x, double y, double) { return fx(x) * fy(y); });
  const GridInterpolant interp(2, coords, vals, 3);
  for (int k = 0; k < 50; ++k) {
    const double pt[2] = {testutil::uniform(0, 1), testutil::uniform(0, 1)};
    // Nested 1D oracle: interpolate rows in x, then the resulting line in y.
    std::vector<double> line(coords[1].size());
    std::vector<double> row(coords[0].size());
    for (std::size_t j = 0; j < coords[1].size(); ++j) {
      for (std::size_t i = 0; i < coords[0].size(); ++i)
        row[i] = vals[i + coords[0].size() * j];
      line[j] = iga::interpolate_1d(coords[0], row, 3, pt[0]);
    }
    const double nested = iga::interpolate_1d(coords[1], line, 3, pt[1]);
    EXPECT_NEAR(interp.evaluate(pt), nested, 1e-13);
  }
}

TEST(GridInterpolant, LinearityOfTheInterpolationOperator) {
  std::array<std::vector<double>, 3> coords{{linspace(0, 1, 5), linspace(0, 1, 5), {}}};
  std::vector<double> f(25), g(25);
  for (auto& v : f) v = testutil::uniform(-2, 2);
  for (auto& v : g) v = testutil::uniform(-2, 2);
  const double alpha = 1.7, beta = -0.6;
  std::vector<double> combo(25);
  for (int k = 0; k < 25; ++k) combo[k] = alpha * f[k] + beta * g[k];
  const GridInterpolant If(2, coords, f, 3), Ig(2, coords, g, 3), Ic(2, coords, combo, 3);
  for (int k = 0; k < 50; ++k) {
    const double pt[2] = {testutil::uniform(0, 1), testutil::uniform(0, 1)};
    EXPECT_NEAR(Ic.evaluate(pt), alpha * If.evaluate(pt) + beta * Ig.evaluate(pt), 1e-12);
  }
}

TEST(GridInterpolant, EvaluateGridMatchesPointEvaluation) {
  for (int q : {1, 3}) {
    std::array<std::vector<double>, 3> coords{{linspace(0, 1, 6), linspace(0, 1, 5), {}}};
    std::vector<double> vals(30);
    for (auto& v : vals) v = testutil::uniform(-1, 1);
    const GridInterpolant interp(2, coords, vals, q);
    std::array<std::vector<double>, 3> queries{{linspace(0, 1, 9), linspace(0, 1, 8), {}}};
    const auto grid = interp.evaluate_grid(queries);
    ASSERT_EQ(grid.size(), 72u);
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 9; ++i) {
        const double pt[2] = {queries[0][i], queries[1][j]};
        EXPECT_NEAR(grid[i + 9 * j], interp.evaluate(pt), 1e-13);
      }
  }
}

TEST(GridInterpolant, ConvergenceOrderMatchesDegreePlusOne) {
  const auto f = [](double x, double y, double) {
    return std::sin(2.0 * x + 0.7) * std::cos(1.3 * y);
  };
  for (int q : {1, 3}) {
    std::vector<double> errors;
    for (int n : {9, 17, 33}) {
      std::array<std::vector<double>, 3> coords{{linspace(0, 1, n), linspace(0, 1, n), {}}};
      const auto vals = sample_grid(coords, 2, f);
      const GridInterpolant interp(2, coords, vals, q);
      double err = 0.0;
      for (int j = 0; j < 40; ++j)
        for (int i = 0; i < 40; ++i) {
          const double pt[2] = {(i + 0.5) / 40.0, (j + 0.5) / 40.0};
          err = std::max(err, std::abs(interp.evaluate(pt) - f(pt[0], pt[1], 0)));
        }
      errors.push_back(err);
    }
    const double order = testutil::fitted_order(errors);
    EXPECT_NEAR(order, q + 1.0, 0.4) << "q=" << q;
  }
}

TEST(GridInterpolant, RejectsInvalidInputs) {
  std::array<std::vector<double>, 3> coords{{{0.0, 0.5, 0.25, 1.0}, linspace(0, 1, 4), {}}};
  std::vector<double> vals(16, 0.0);
  EXPECT_THROW(GridInterpolant(2, coords, vals, 3), std::invalid_argument);  // non-monotone
  std::array<std::vector<double>, 3> coarse{{linspace(0, 1, 3), linspace(0, 1, 4), {}}};
  EXPECT_THROW(GridInterpolant(2, coarse, std::vector<double>(12, 0.0), 3),
               std::invalid_argument);  // too few samples for cubic
  std::array<std::vector<double>, 3> ok{{linspace(0, 1, 4), linspace(0, 1, 4), {}}};
  EXPECT_THROW(GridInterpolant(2, ok, std::vector<double>(15, 0.0), 3),
               std::invalid_argument);  // wrong value count
  EXPECT_THROW(GridInterpolant(2, ok, std::vector<double>(16, 0.0), 2),
               std::invalid_argument);  // unsupported degree
}

TEST(GridInterpolant, ExtrapolationIsAHardError) {
  std::array<std::vector<double>, 3> coords{{linspace(0.2, 0.8, 5), linspace(0, 1, 5), {}}};
  const GridInterpolant interp(2, coords, std::vector<double>(25, 1.0), 1);
  const double below[2] = {0.1, 0.5};
  const double above[2] = {0.5, 1.1};
  EXPECT_THROW(interp.evaluate(below), std::invalid_argument);
  EXPECT_THROW(interp.evaluate(above), std::invalid_argument);
}

}  // namespace
