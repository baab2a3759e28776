#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iga {

/// Maximum supported B-spline degree for the stack-allocated evaluation
/// buffers used throughout the assembly kernels.
inline constexpr int kMaxDegree = 8;

/// Open uniform knot vector on [0,1]: the end knots are repeated degree+1
/// times and the interior breakpoints are the exact grid points i/num_elements.
struct KnotVector {
  int degree = 0;
  int num_elements = 0;
  double spacing = 0.0;            // 1 / num_elements
  std::vector<double> knots;       // size num_elements + 2*degree + 1

  int num_basis() const { return num_elements + degree; }
};

inline KnotVector make_open_uniform_knots(int degree, int num_elements) {
  if (degree < 1)
    throw std::invalid_argument("make_open_uniform_knots: degree must be >= 1, got " +
                                std::to_string(degree));
  if (num_elements < 1)
    throw std::invalid_argument("make_open_uniform_knots: num_elements must be >= 1, got " +
                                std::to_string(num_elements));
  if (degree > kMaxDegree)
    throw std::invalid_argument("make_open_uniform_knots: degree exceeds supported maximum " +
                                std::to_string(kMaxDegree));
  KnotVector kv;
  kv.degree = degree;
  kv.num_elements = num_elements;
  kv.spacing = 1.0 / num_elements;
  kv.knots.resize(static_cast<std::size_t>(num_elements) + 2 * degree + 1);
  for (int i = 0; i <= degree; ++i) kv.knots[i] = 0.0;
  for (int i = 1; i < num_elements; ++i)
    kv.knots[degree + i] = static_cast<double>(i) / num_elements;
  for (int i = 0; i <= degree; ++i)
    kv.knots[static_cast<std::size_t>(degree) + num_elements + i] = 1.0;
  return kv;
}

/// Locates the element (knot span minus the leading multiplicity) containing x.
inline int find_element(const KnotVector& kv, double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("eval_basis: coordinate outside [0,1]");
  int e = static_cast<int>(x * kv.num_elements);
  if (e >= kv.num_elements) e = kv.num_elements - 1;
  // Guard against floating bin assignment right at a breakpoint.
  while (e > 0 && x < kv.knots[kv.degree + e]) --e;
  while (e + 1 < kv.num_elements && x >= kv.knots[kv.degree + e + 1]) ++e;
  return e;
}

/// Cox-de Boor evaluation of the degree+1 basis functions that are nonzero on
/// the element containing x, together with their first derivatives.
/// Returns the element index; the nonzero functions have indices
/// element .. element+degree.
inline int eval_basis(const KnotVector& kv, double x, std::span<double> values,
                      std::span<double> derivatives) {
  const int p = kv.degree;
  if (static_cast<int>(values.size()) < p + 1 || static_cast<int>(derivatives.size()) < p + 1)
    throw std::invalid_argument("eval_basis: output spans too small");
  const int element = find_element(kv, x);
  const int span = element + p;  // index into the full knot sequence
  const double* U = kv.knots.data();

  std::array<double, kMaxDegree + 1> left{}, right{}, lower{};
  values[0] = 1.0;
  if (p == 1) lower[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
    if (j == p - 1)
      for (int r = 0; r < p; ++r) lower[r] = values[r];
  }

  // First derivatives from the degree p-1 values:
  //   N'_{i,p} = p * ( N_{i,p-1}/(U[i+p]-U[i]) - N_{i+1,p-1}/(U[i+p+1]-U[i+1]) )
  // where the nonzero degree p-1 functions on this span are i = span-p+1 .. span.
  for (int r = 0; r <= p; ++r) {
    const int i = span - p + r;
    const double a = (r == 0) ? 0.0 : lower[r - 1] / (U[i + p] - U[i]);
    const double b = (r == p) ? 0.0 : lower[r] / (U[i + p + 1] - U[i + 1]);
    derivatives[r] = p * (a - b);
  }
  return element;
}

/// Tensor-product B-spline space with identical knot vectors per direction.
/// Flat dof and element indices are lexicographic with the first direction
/// running fastest.
struct TensorSpace {
  int dim = 0;
  KnotVector kv;
  int dofs_per_dim = 0;
  long long num_dofs = 0;

  int degree() const { return kv.degree; }
  int elements_per_dim() const { return kv.num_elements; }
  long long num_elements() const {
    long long n = 1;
    for (int d = 0; d < dim; ++d) n *= kv.num_elements;
    return n;
  }

  long long dof_flat(std::span<const int> multi) const {
    long long f = 0;
    for (int d = dim - 1; d >= 0; --d) f = f * dofs_per_dim + multi[d];
    return f;
  }
  std::array<int, 3> dof_multi(long long flat) const {
    std::array<int, 3> m{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      m[d] = static_cast<int>(flat % dofs_per_dim);
      flat /= dofs_per_dim;
    }
    return m;
  }
  long long element_flat(std::span<const int> multi) const {
    long long f = 0;
    for (int d = dim - 1; d >= 0; --d) f = f * kv.num_elements + multi[d];
    return f;
  }
  std::array<int, 3> element_multi(long long flat) const {
    std::array<int, 3> m{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      m[d] = static_cast<int>(flat % kv.num_elements);
      flat /= kv.num_elements;
    }
    return m;
  }
};

inline TensorSpace make_tensor_space(int dim, KnotVector kv) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("make_tensor_space: dim must be 2 or 3, got " +
                                std::to_string(dim));
  TensorSpace s;
  s.dim = dim;
  s.kv = std::move(kv);
  s.dofs_per_dim = s.kv.num_basis();
  s.num_dofs = 1;
  for (int d = 0; d < dim; ++d) s.num_dofs *= s.dofs_per_dim;
  return s;
}

/// Interior dof lattice of the stencil function domain: per direction the
/// dofs 2p .. num_basis-1-2p, mapped to the uniform unit grid k/(size-1).
struct InteriorLattice {
  int dim = 0;
  int offset = 0;  // first interior dof index per direction (= 2p)
  int size = 0;    // interior dofs per direction (= nel - 3p)

  double coord(int k) const { return static_cast<double>(k) / (size - 1); }
  long long count() const {
    long long c = 1;
    for (int d = 0; d < dim; ++d) c *= size;
    return c;
  }
};

inline InteriorLattice interior_lattice(const TensorSpace& space) {
  const int p = space.degree();
  const int nel = space.elements_per_dim();
  const int size = nel - 3 * p;
  if (size < 2)
    throw std::invalid_argument(
        "interior_lattice: mesh too coarse for surrogate (need num_elements > 3*degree + 1, "
        "got num_elements=" +
        std::to_string(nel) + ", degree=" + std::to_string(p) + ")");
  InteriorLattice lat;
  lat.dim = space.dim;
  lat.offset = 2 * p;
  lat.size = size;
  return lat;
}

}  // namespace iga
