#pragma once

// Shared oracles for the test suites. Everything here is deliberately naive
// and independent of the library's evaluation paths.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "iga/splines.hpp"

namespace testutil {

/// Naive recursive Cox-de Boor value of basis function i of degree p.
inline double naive_bspline(const std::vector<double>& U, int i, int p, double x) {
  if (p == 0) {
    // Half-open spans, closed at the right end of the last nontrivial span.
    if (U[i] <= x && x < U[i + 1]) return 1.0;
    if (x == U.back() && U[i] < U[i + 1] && U[i + 1] == U.back()) return 1.0;
    return 0.0;
  }
  double left = 0.0, right = 0.0;
  if (U[i + p] > U[i]) left = (x - U[i]) / (U[i + p] - U[i]) * naive_bspline(U, i, p - 1, x);
  if (U[i + p + 1] > U[i + 1])
    right = (U[i + p + 1] - x) / (U[i + p + 1] - U[i + 1]) * naive_bspline(U, i + 1, p - 1, x);
  return left + right;
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<double> A, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k])) piv = i;
    if (std::abs(A[piv * n + k]) < 1e-300) throw std::runtime_error("dense_solve: singular");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double l = A[i * n + k] / A[k * n + k];
      for (int j = k; j < n; ++j) A[i * n + j] -= l * A[k * n + j];
      b[i] -= l * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i * n + j] * x[j];
    x[i] = s / A[i * n + i];
  }
  return x;
}

/// Least-squares slope of log(err) against log(h); h halves between entries.
inline double fitted_order(std::span<const double> errors) {
  const int n = static_cast<int>(errors.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    const double x = -k * std::log(2.0);  // log h up to a constant
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Greville abscissae of an open uniform knot vector.
inline std::vector<double> greville_points(const iga::KnotVector& kv) {
  std::vector<double> g(kv.num_basis());
  for (int i = 0; i < kv.num_basis(); ++i) {
    double s = 0.0;
    for (int k = 1; k <= kv.degree; ++k) s += kv.knots[i + k];
    g[i] = s / kv.degree;
  }
  return g;
}

/// Spline coefficients interpolating f at the Greville abscissae (1D).
inline std::vector<double> greville_interpolate(const iga::KnotVector& kv,
                                                const std::function<double(double)>& f) {
  const int n = kv.num_basis();
  const auto pts = greville_points(kv);
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0), b(n);
  std::vector<double> vals(kv.degree + 1), ders(kv.degree + 1);
  for (int r = 0; r < n; ++r) {
    const int e = iga::eval_basis(kv, pts[r], vals, ders);
    for (int k = 0; k <= kv.degree; ++k) A[static_cast<std::size_t>(r) * n + e + k] = vals[k];
    b[r] = f(pts[r]);
  }
  return dense_solve(std::move(A), std::move(b));
}

inline std::mt19937& rng() {
  static std::mt19937 gen(12345u);
  return gen;
}

inline double uniform(double a, double b) {
  std::uniform_real_distribution<double> dist(a, b);
  return dist(rng());
}

}  // namespace testutil
