#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iga/splines.hpp"

namespace iga {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major, dim x dim occupied

/// Tensor-product spline patch map from (0,1)^dim into physical space.
/// The geometry space is independent of the analysis space: it keeps its own
/// degrees and (open uniform) knot vectors. Weights, when present, make the
/// map rational (NURBS); they must be strictly positive.
struct PatchMap {
  int dim = 0;
  std::array<KnotVector, 3> knots;      // [0..dim)
  std::vector<double> control_points;   // dim doubles per point, first direction fastest
  std::vector<double> weights;          // empty for polynomial maps

  int basis_count(int d) const { return knots[d].num_basis(); }
  long long num_control_points() const {
    long long n = 1;
    for (int d = 0; d < dim; ++d) n *= basis_count(d);
    return n;
  }
  bool rational() const { return !weights.empty(); }
};

inline void validate_patch(const PatchMap& g) {
  if (g.dim != 2 && g.dim != 3) throw std::invalid_argument("PatchMap: dim must be 2 or 3");
  const long long n = g.num_control_points();
  if (static_cast<long long>(g.control_points.size()) != n * g.dim)
    throw std::invalid_argument("PatchMap: control point count does not match knot vectors");
  if (!g.weights.empty()) {
    if (static_cast<long long>(g.weights.size()) != n)
      throw std::invalid_argument("PatchMap: weight count does not match control grid");
    for (double w : g.weights)
      if (!(w > 0.0)) throw std::invalid_argument("PatchMap: weights must be strictly positive");
  }
}

namespace detail {

inline void check_domain(const PatchMap& g, std::span<const double> xhat) {
  for (int d = 0; d < g.dim; ++d)
    if (!(xhat[d] >= 0.0 && xhat[d] <= 1.0))
      throw std::invalid_argument("PatchMap evaluation: point outside [0,1]^n");
}

/// Homogeneous-coordinate evaluation of the map and its Jacobian.
/// Non-rational maps are treated as rational with unit weights.
inline void eval_patch(const PatchMap& g, std::span<const double> xhat, Vec3& value,
                       Mat3& jacobian) {
  check_domain(g, xhat);
  const int n = g.dim;
  std::array<std::array<double, kMaxDegree + 1>, 3> vals{}, ders{};
  std::array<int, 3> first{0, 0, 0};
  std::array<int, 3> width{1, 1, 1};
  for (int d = 0; d < n; ++d) {
    const int e = eval_basis(g.knots[d], xhat[d], vals[d], ders[d]);
    first[d] = e;
    width[d] = g.knots[d].degree + 1;
  }

  std::array<double, 4> S{0, 0, 0, 0};                    // homogeneous sum
  std::array<std::array<double, 4>, 3> dS{};               // per-direction partials
  std::array<int, 3> idx{0, 0, 0};
  long long total = 1;
  for (int d = 0; d < n; ++d) total *= width[d];
  for (long long k = 0; k < total; ++k) {
    double b = 1.0;
    std::array<double, 3> db{1.0, 1.0, 1.0};
    for (int d = 0; d < n; ++d) {
      b *= vals[d][idx[d]];
      for (int c = 0; c < n; ++c) db[c] *= (c == d) ? ders[d][idx[d]] : vals[d][idx[d]];
    }
    long long flat = 0;
    for (int d = n - 1; d >= 0; --d) flat = flat * g.basis_count(d) + (first[d] + idx[d]);
    const double w = g.weights.empty() ? 1.0 : g.weights[flat];
    for (int c = 0; c < n; ++c) {
      const double pw = g.control_points[flat * n + c] * w;
      S[c] += b * pw;
      for (int d = 0; d < n; ++d) dS[d][c] += db[d] * pw;
    }
    S[3] += b * w;
    for (int d = 0; d < n; ++d) dS[d][3] += db[d] * w;

    for (int d = 0; d < n; ++d) {
      if (++idx[d] < width[d]) break;
      idx[d] = 0;
    }
  }

  value = {0, 0, 0};
  for (int c = 0; c < n; ++c) value[c] = S[c] / S[3];
  jacobian.fill(0.0);
  for (int d = 0; d < n; ++d)
    for (int c = 0; c < n; ++c)
      jacobian[c * 3 + d] = (dS[d][c] - value[c] * dS[d][3]) / S[3];
}

inline double det_dim(const Mat3& J, int n) {
  if (n == 2) return J[0] * J[4] - J[1] * J[3];
  return J[0] * (J[4] * J[8] - J[5] * J[7]) - J[1] * (J[3] * J[8] - J[5] * J[6]) +
         J[2] * (J[3] * J[7] - J[4] * J[6]);
}

/// Adjugate (transposed cofactor matrix), so that J * adj(J) = det(J) * I.
inline Mat3 adjugate_dim(const Mat3& J, int n) {
  Mat3 A{};
  if (n == 2) {
    A[0] = J[4];
    A[1] = -J[1];
    A[3] = -J[3];
    A[4] = J[0];
  } else {
    A[0] = J[4] * J[8] - J[5] * J[7];
    A[1] = J[2] * J[7] - J[1] * J[8];
    A[2] = J[1] * J[5] - J[2] * J[4];
    A[3] = J[5] * J[6] - J[3] * J[8];
    A[4] = J[0] * J[8] - J[2] * J[6];
    A[5] = J[2] * J[3] - J[0] * J[5];
    A[6] = J[3] * J[7] - J[4] * J[6];
    A[7] = J[1] * J[6] - J[0] * J[7];
    A[8] = J[0] * J[4] - J[1] * J[3];
  }
  return A;
}

}  // namespace detail

inline Vec3 map_point(const PatchMap& g, std::span<const double> xhat) {
  Vec3 v;
  Mat3 J;
  detail::eval_patch(g, xhat, v, J);
  return v;
}

inline Mat3 jacobian(const PatchMap& g, std::span<const double> xhat) {
  Vec3 v;
  Mat3 J;
  detail::eval_patch(g, xhat, v, J);
  return J;
}

/// Pulled-back diffusion coefficient of the Laplace operator,
///   K = Dphi^{-1} Dphi^{-T} / |det(Dphi^{-1})| = adj(Dphi) adj(Dphi)^T / |det(Dphi)|,
/// a symmetric positive definite dim x dim matrix.
inline Mat3 pullback_from_jacobian(const Mat3& J, int n) {
  const double det = detail::det_dim(J, n);
  if (std::abs(det) < 1e-14)
    throw std::runtime_error("pullback_coefficient: geometry Jacobian is singular");
  const Mat3 A = detail::adjugate_dim(J, n);
  Mat3 K{};
  const double inv = 1.0 / std::abs(det);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += A[i * 3 + k] * A[j * 3 + k];
      K[i * 3 + j] = s * inv;
    }
  return K;
}

inline Mat3 pullback_coefficient(const PatchMap& g, std::span<const double> xhat) {
  return pullback_from_jacobian(jacobian(g, xhat), g.dim);
}

// ---------------------------------------------------------------------------
// Built-in geometries
// ---------------------------------------------------------------------------

namespace detail {

inline PatchMap identity_patch(int dim) {
  PatchMap g;
  g.dim = dim;
  for (int d = 0; d < dim; ++d) g.knots[d] = make_open_uniform_knots(1, 1);
  const int npts = 1 << dim;
  g.control_points.resize(static_cast<std::size_t>(npts) * dim);
  for (int k = 0; k < npts; ++k)
    for (int d = 0; d < dim; ++d)
      g.control_points[static_cast<std::size_t>(k) * dim + d] = (k >> d) & 1;
  return g;
}

/// Exact NURBS quarter annulus in the first quadrant, inner radius 1 and
/// outer radius 2. Direction 0 is radial (degree 1), direction 1 is angular
/// (degree 2 with the classical conic weight 1/sqrt(2) on the middle point).
inline PatchMap quarter_annulus_patch() {
  PatchMap g;
  g.dim = 2;
  g.knots[0] = make_open_uniform_knots(1, 1);
  g.knots[1] = make_open_uniform_knots(2, 1);
  const double radii[2] = {1.0, 2.0};
  const double arc[3][2] = {{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  const double wj[3] = {1.0, std::sqrt(0.5), 1.0};
  g.control_points.resize(2 * 3 * 2);
  g.weights.resize(2 * 3);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 2; ++i) {
      const long long flat = i + 2 * j;  // radial direction fastest
      g.control_points[flat * 2 + 0] = radii[i] * arc[j][0];
      g.control_points[flat * 2 + 1] = radii[i] * arc[j][1];
      g.weights[flat] = wj[j];
    }
  return g;
}

/// Quarter annulus with a deterministic radial perturbation of the control
/// points. The scale factors below define the geometry; they keep the map a
/// diffeomorphism while bending both boundary arcs.
inline PatchMap quarter_annulus_bumps_patch() {
  PatchMap g = quarter_annulus_patch();
  constexpr double kBump[2][3] = {{0.10, -0.14, 0.08}, {-0.06, 0.12, -0.10}};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 2; ++i) {
      const long long flat = i + 2 * j;
      const double s = 1.0 + kBump[i][j];
      g.control_points[flat * 2 + 0] *= s;
      g.control_points[flat * 2 + 1] *= s;
    }
  return g;
}

/// 3D bent and twisted box: a single triquadratic Bezier element whose
/// control points follow a parabolic center line with a linear twist of the
/// cross section about it.
inline PatchMap bent_box_patch() {
  PatchMap g;
  g.dim = 3;
  for (int d = 0; d < 3; ++d) g.knots[d] = make_open_uniform_knots(2, 1);
  g.control_points.resize(27 * 3);
  constexpr double kHalfWidth = 0.35;
  constexpr double kBend = 0.55;
  constexpr double kTwist = M_PI / 3.0;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        const double t = 0.5 * k;   // along the axis
        const double u = 0.5 * i - 0.25;
        const double v = 0.5 * j - 0.25;
        const double ang = kTwist * t;
        const double cu = u * std::cos(ang) - v * std::sin(ang);
        const double cv = u * std::sin(ang) + v * std::cos(ang);
        const long long flat = i + 3 * (j + 3 * k);
        g.control_points[flat * 3 + 0] = 2.0 * kHalfWidth * cu;
        g.control_points[flat * 3 + 1] = kBend * 4.0 * t * (1.0 - t) + 2.0 * kHalfWidth * cv;
        g.control_points[flat * 3 + 2] = t;
      }
  return g;
}

}  // namespace detail

inline PatchMap builtin_geometry(const std::string& name, int dim) {
  PatchMap g;
  if (name == "identity") {
    g = detail::identity_patch(dim);
  } else if (name == "quarter_annulus") {
    if (dim != 2) throw std::invalid_argument("builtin_geometry: quarter_annulus is 2D only");
    g = detail::quarter_annulus_patch();
  } else if (name == "quarter_annulus_bumps") {
    if (dim != 2)
      throw std::invalid_argument("builtin_geometry: quarter_annulus_bumps is 2D only");
    g = detail::quarter_annulus_bumps_patch();
  } else if (name == "bent_box") {
    if (dim != 3) throw std::invalid_argument("builtin_geometry: bent_box is 3D only");
    g = detail::bent_box_patch();
  } else {
    throw std::invalid_argument("builtin_geometry: unknown geometry '" + name + "'");
  }
  validate_patch(g);
  return g;
}

// ---------------------------------------------------------------------------
// Plain text import/export
// ---------------------------------------------------------------------------
//
// Line-oriented format (decimal point, scientific notation accepted):
//   dim <n>
//   degree <p_1> ... <p_n>
//   elements <e_1> ... <e_n>          open uniform knot vectors per direction
//   points <count>
//   <x y [z]>                          one control point per line, first
//   ...                                direction fastest
//   weights <count|0>
//   <w>                                one weight per line when count > 0
// ---------------------------------------------------------------------------

inline void write_geometry(std::ostream& os, const PatchMap& g) {
  os << "dim " << g.dim << "\n";
  os << "degree";
  for (int d = 0; d < g.dim; ++d) os << ' ' << g.knots[d].degree;
  os << "\nelements";
  for (int d = 0; d < g.dim; ++d) os << ' ' << g.knots[d].num_elements;
  os << "\npoints " << g.num_control_points() << "\n";
  os << std::setprecision(17);
  const long long n = g.num_control_points();
  for (long long k = 0; k < n; ++k) {
    for (int d = 0; d < g.dim; ++d) os << (d ? " " : "") << g.control_points[k * g.dim + d];
    os << "\n";
  }
  os << "weights " << g.weights.size() << "\n";
  for (double w : g.weights) os << w << "\n";
}

inline PatchMap read_geometry(std::istream& is) {
  PatchMap g;
  std::string key;
  auto expect = [&](const char* want) {
    if (!(is >> key) || key != want)
      throw std::runtime_error(std::string("read_geometry: expected '") + want + "'");
  };
  expect("dim");
  if (!(is >> g.dim)) throw std::runtime_error("read_geometry: bad dim");
  if (g.dim != 2 && g.dim != 3) throw std::runtime_error("read_geometry: dim must be 2 or 3");
  expect("degree");
  std::array<int, 3> degree{};
  for (int d = 0; d < g.dim; ++d)
    if (!(is >> degree[d])) throw std::runtime_error("read_geometry: bad degree");
  expect("elements");
  for (int d = 0; d < g.dim; ++d) {
    int e = 0;
    if (!(is >> e)) throw std::runtime_error("read_geometry: bad element count");
    g.knots[d] = make_open_uniform_knots(degree[d], e);
  }
  expect("points");
  long long npts = 0;
  if (!(is >> npts)) throw std::runtime_error("read_geometry: bad point count");
  if (npts != g.num_control_points())
    throw std::runtime_error("read_geometry: point count does not match knot vectors");
  g.control_points.resize(npts * g.dim);
  for (long long k = 0; k < npts * g.dim; ++k)
    if (!(is >> g.control_points[k])) throw std::runtime_error("read_geometry: bad point data");
  expect("weights");
  long long nw = 0;
  if (!(is >> nw)) throw std::runtime_error("read_geometry: bad weight count");
  if (nw != 0 && nw != npts)
    throw std::runtime_error("read_geometry: weight count must be 0 or match points");
  g.weights.resize(nw);
  for (long long k = 0; k < nw; ++k)
    if (!(is >> g.weights[k])) throw std::runtime_error("read_geometry: bad weight data");
  validate_patch(g);
  return g;
}

inline void write_geometry_file(const std::string& path, const PatchMap& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_geometry_file: cannot open " + path);
  write_geometry(os, g);
}

inline PatchMap read_geometry_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_geometry_file: cannot open " + path);
  return read_geometry(is);
}

}  // namespace iga
