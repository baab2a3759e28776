#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iga {
namespace detail {

/// Slopes of the cubic spline interpolant with not-a-knot end conditions
/// (third derivative continuous across the first and last interior
/// breakpoints). The end rows follow the tridiagonal reduction used by the
/// classical piecewise-cubic texts, so no corner elimination is needed.
inline void not_a_knot_slopes(std::span<const double> x, std::span<const double> y,
                              std::span<double> d) {
  const int m = static_cast<int>(x.size());
  std::vector<double> h(m - 1), delta(m - 1);
  for (int k = 0; k + 1 < m; ++k) {
    h[k] = x[k + 1] - x[k];
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  diag[0] = h[1];
  sup[0] = h[0] + h[1];
  rhs[0] = ((h[0] + 2.0 * (h[0] + h[1])) * h[1] * delta[0] + h[0] * h[0] * delta[1]) /
           (h[0] + h[1]);
  for (int i = 1; i + 1 < m; ++i) {
    sub[i] = h[i];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    sup[i] = h[i - 1];
    rhs[i] = 3.0 * (h[i] * delta[i - 1] + h[i - 1] * delta[i]);
  }
  sub[m - 1] = h[m - 2] + h[m - 3];
  diag[m - 1] = h[m - 3];
  rhs[m - 1] = (h[m - 2] * h[m - 2] * delta[m - 3] +
                (2.0 * (h[m - 3] + h[m - 2]) + h[m - 2]) * h[m - 3] * delta[m - 2]) /
               (h[m - 3] + h[m - 2]);

  // Thomas elimination.
  for (int i = 1; i < m; ++i) {
    const double l = sub[i] / diag[i - 1];
    diag[i] -= l * sup[i - 1];
    rhs[i] -= l * rhs[i - 1];
  }
  d[m - 1] = rhs[m - 1] / diag[m - 1];
  for (int i = m - 2; i >= 0; --i) d[i] = (rhs[i] - sup[i] * d[i + 1]) / diag[i];
}

/// Interval index for evaluation; sets exact to the matching sample index
/// when x coincides with a breakpoint (bitwise), which lets callers return
/// sample data untouched.
inline int find_interval(std::span<const double> x, double q, int& exact) {
  if (q < x.front() || q > x.back())
    throw std::invalid_argument("GridInterpolant: evaluation point outside the sample hull "
                                "(extrapolation is not supported)");
  const auto it = std::lower_bound(x.begin(), x.end(), q);
  if (it != x.end() && *it == q) {
    exact = static_cast<int>(it - x.begin());
    return std::min<int>(exact, static_cast<int>(x.size()) - 2);
  }
  exact = -1;
  return static_cast<int>(it - x.begin()) - 1;
}

}  // namespace detail

/// Degree 1 or 3 interpolation of one data line at a single point.
/// Cubic interpolation uses not-a-knot end conditions and requires at least
/// q+1 samples; evaluation exactly at a sample coordinate reproduces the
/// sample value bitwise.
inline double interpolate_1d(std::span<const double> x, std::span<const double> y, int q,
                             double point) {
  const int m = static_cast<int>(x.size());
  if (m < q + 1)
    throw std::invalid_argument("interpolate_1d: too few samples for interpolation degree");
  int exact = -1;
  const int i = detail::find_interval(x, point, exact);
  if (exact >= 0) return y[exact];
  if (q == 1) {
    const double t = (point - x[i]) / (x[i + 1] - x[i]);
    return y[i] + t * (y[i + 1] - y[i]);
  }
  std::vector<double> d(m);
  detail::not_a_knot_slopes(x, y, d);
  const double h = x[i + 1] - x[i];
  const double delta = (y[i + 1] - y[i]) / h;
  const double c2 = (3.0 * delta - 2.0 * d[i] - d[i + 1]) / h;
  const double c3 = (d[i] + d[i + 1] - 2.0 * delta) / (h * h);
  const double s = point - x[i];
  return y[i] + s * (d[i] + s * (c2 + s * c3));
}

namespace detail {

/// Dense evaluation operator of the 1D interpolant: E[q][s] is the value at
/// query point q of the interpolant through the cardinal data e_s. Built by
/// one spline solve per sample, so a row at a sample coordinate is an exact
/// unit row.
inline std::vector<double> interpolation_matrix(std::span<const double> x,
                                                std::span<const double> queries, int q) {
  const int m = static_cast<int>(x.size());
  const int nq = static_cast<int>(queries.size());
  std::vector<double> E(static_cast<std::size_t>(nq) * m, 0.0);
  std::vector<int> interval(nq), exact(nq);
  for (int k = 0; k < nq; ++k) interval[k] = find_interval(x, queries[k], exact[k]);
  if (q == 1) {
    for (int k = 0; k < nq; ++k) {
      if (exact[k] >= 0) {
        E[static_cast<std::size_t>(k) * m + exact[k]] = 1.0;
        continue;
      }
      const int i = interval[k];
      const double t = (queries[k] - x[i]) / (x[i + 1] - x[i]);
      E[static_cast<std::size_t>(k) * m + i] = 1.0 - t;
      E[static_cast<std::size_t>(k) * m + i + 1] = t;
    }
    return E;
  }
  std::vector<double> unit(m, 0.0), d(m);
  for (int s = 0; s < m; ++s) {
    unit[s] = 1.0;
    not_a_knot_slopes(x, unit, d);
    for (int k = 0; k < nq; ++k) {
      if (exact[k] >= 0) {
        E[static_cast<std::size_t>(k) * m + s] = (exact[k] == s) ? 1.0 : 0.0;
        continue;
      }
      const int i = interval[k];
      const double h = x[i + 1] - x[i];
      const double y0 = unit[i];
      const double delta = (unit[i + 1] - y0) / h;
      const double c2 = (3.0 * delta - 2.0 * d[i] - d[i + 1]) / h;
      const double c3 = (d[i] + d[i + 1] - 2.0 * delta) / (h * h);
      const double t = queries[k] - x[i];
      E[static_cast<std::size_t>(k) * m + s] = y0 + t * (d[i] + t * (c2 + t * c3));
    }
    unit[s] = 0.0;
  }
  return E;
}

/// Contracts dimension d of a first-direction-fastest array with the
/// evaluation operator E (nq x shape[d]).
inline std::vector<double> mode_product(const std::vector<double>& in,
                                        std::array<int, 3>& shape, int dim, int d,
                                        const std::vector<double>& E, int nq) {
  long long inner = 1, outer = 1;
  for (int k = 0; k < d; ++k) inner *= shape[k];
  for (int k = d + 1; k < dim; ++k) outer *= shape[k];
  const int m = shape[d];
  std::vector<double> out(inner * nq * outer);
  for (long long o = 0; o < outer; ++o)
    for (int r = 0; r < nq; ++r) {
      const double* Er = E.data() + static_cast<std::size_t>(r) * m;
      double* dst = out.data() + inner * (r + static_cast<long long>(nq) * o);
      for (long long i = 0; i < inner; ++i) dst[i] = 0.0;
      for (int s = 0; s < m; ++s) {
        const double w = Er[s];
        if (w == 0.0) continue;
        const double* src = in.data() + inner * (s + static_cast<long long>(m) * o);
        for (long long i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
    }
  shape[d] = nq;
  return out;
}

}  // namespace detail

/// Tensor-product interpolant on a rectilinear grid, degree 1 (multilinear)
/// or 3 (cubic spline with not-a-knot ends per direction). Values are stored
/// flat with the first direction fastest.
class GridInterpolant {
 public:
  GridInterpolant(int dim, std::array<std::vector<double>, 3> coords,
                  std::vector<double> values, int degree)
      : dim_(dim), degree_(degree), coords_(std::move(coords)), values_(std::move(values)) {
    if (dim_ != 2 && dim_ != 3)
      throw std::invalid_argument("GridInterpolant: dim must be 2 or 3");
    if (degree_ != 1 && degree_ != 3)
      throw std::invalid_argument("GridInterpolant: interpolation degree must be 1 or 3, got " +
                                  std::to_string(degree_));
    long long total = 1;
    for (int d = 0; d < dim_; ++d) {
      const auto& c = coords_[d];
      if (static_cast<int>(c.size()) < degree_ + 1)
        throw std::invalid_argument(
            "GridInterpolant: too few samples for interpolation degree (need at least " +
            std::to_string(degree_ + 1) + " per direction)");
      for (std::size_t k = 0; k + 1 < c.size(); ++k)
        if (!(c[k] < c[k + 1]))
          throw std::invalid_argument(
              "GridInterpolant: sample coordinates must be strictly increasing");
      total *= static_cast<long long>(c.size());
    }
    if (static_cast<long long>(values_.size()) != total)
      throw std::invalid_argument("GridInterpolant: value grid size does not match coordinates");
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& coords(int d) const { return coords_[d]; }

  /// Single-point evaluation by line-by-line reduction of the data grid.
  double evaluate(std::span<const double> point) const {
    if (static_cast<int>(point.size()) < dim_)
      throw std::invalid_argument("GridInterpolant::evaluate: point has too few components");
    std::vector<double> work = values_;
    long long lines = static_cast<long long>(work.size());
    for (int d = 0; d < dim_; ++d) {
      const int m = static_cast<int>(coords_[d].size());
      lines /= m;
      std::vector<double> reduced(lines);
      std::vector<double> line(m);
      for (long long l = 0; l < lines; ++l) {
        for (int s = 0; s < m; ++s) line[s] = work[l * m + s];
        reduced[l] = interpolate_1d(coords_[d], line, degree_, point[d]);
      }
      // Contracting the fastest direction leaves the next one fastest.
      work = std::move(reduced);
    }
    return work[0];
  }

  std::vector<double> evaluate_many(std::span<const double> points) const {
    const long long n = static_cast<long long>(points.size()) / dim_;
    std::vector<double> out(n);
    for (long long k = 0; k < n; ++k) out[k] = evaluate(points.subspan(k * dim_, dim_));
    return out;
  }

  /// Evaluation on a tensor grid of query coordinates; returns the value grid
  /// flat with the first direction fastest.
  std::vector<double> evaluate_grid(const std::array<std::vector<double>, 3>& queries) const {
    std::array<int, 3> shape{1, 1, 1};
    for (int d = 0; d < dim_; ++d) shape[d] = static_cast<int>(coords_[d].size());
    std::vector<double> work = values_;
    for (int d = 0; d < dim_; ++d) {
      const auto E = detail::interpolation_matrix(coords_[d], queries[d], degree_);
      work = detail::mode_product(work, shape, dim_, d, E,
                                  static_cast<int>(queries[d].size()));
    }
    return work;
  }

 private:
  int dim_;
  int degree_;
  std::array<std::vector<double>, 3> coords_;
  std::vector<double> values_;
};

inline GridInterpolant build_interpolant(int dim, std::array<std::vector<double>, 3> coords,
                                         std::vector<double> values, int degree) {
  return GridInterpolant(dim, std::move(coords), std::move(values), degree);
}

}  // namespace iga
