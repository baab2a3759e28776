#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iga/splines.hpp"

namespace iga {

/// Gauss-Legendre rule mapped to [0,1].
struct GaussRule {
  int points = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_rule(int m) {
  if (m < 1 || m > 10)
    throw std::invalid_argument("gauss_rule: point count must be in [1,10], got " +
                                std::to_string(m));
  GaussRule rule;
  rule.points = m;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  // Newton iteration on the Legendre polynomial P_m over (-1,1).
  const auto legendre = [m](double x, double& pm, double& pm1) {
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= m; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    pm = p1;
    pm1 = p0;
  };
  for (int k = 0; k < m; ++k) {
    double x = (m == 1) ? 0.0 : std::cos(M_PI * (k + 0.75) / (m + 0.5));
    double pm = 0.0, pm1 = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, pm, pm1);
      dp = m * (x * pm - pm1) / (x * x - 1.0);
      const double dx = pm / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(x, pm, pm1);
    dp = m * (x * pm - pm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map from (-1,1) to (0,1); enumerate nodes in increasing order.
    rule.nodes[m - 1 - k] = 0.5 * (x + 1.0);
    rule.weights[m - 1 - k] = 0.5 * w;
  }
  return rule;
}

/// Tensor quadrature grid of one element: reference coordinates and weights
/// scaled by the element measure.
struct ElementQuadrature {
  int dim = 0;
  int points_per_dim = 0;
  std::array<int, 3> element{0, 0, 0};
  std::vector<double> points;   // dim entries per point, first direction fastest
  std::vector<double> weights;  // product weights times h^dim
};

inline ElementQuadrature element_quadrature(const TensorSpace& space,
                                            std::span<const int> element,
                                            const GaussRule& rule) {
  const int nel = space.elements_per_dim();
  for (int d = 0; d < space.dim; ++d)
    if (element[d] < 0 || element[d] >= nel)
      throw std::invalid_argument("element_quadrature: element index out of range");
  ElementQuadrature q;
  q.dim = space.dim;
  q.points_per_dim = rule.points;
  for (int d = 0; d < space.dim; ++d) q.element[d] = element[d];
  const double h = space.kv.spacing;
  long long total = 1;
  for (int d = 0; d < space.dim; ++d) total *= rule.points;
  q.points.resize(total * space.dim);
  q.weights.resize(total);
  std::array<int, 3> idx{0, 0, 0};
  for (long long k = 0; k < total; ++k) {
    double w = 1.0;
    for (int d = 0; d < space.dim; ++d) {
      q.points[k * space.dim + d] = (element[d] + rule.nodes[idx[d]]) * h;
      w *= rule.weights[idx[d]] * h;
    }
    q.weights[k] = w;
    for (int d = 0; d < space.dim; ++d) {
      if (++idx[d] < rule.points) break;
      idx[d] = 0;
    }
  }
  return q;
}

}  // namespace iga
