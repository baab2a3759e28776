#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "iga/geometry.hpp"
#include "iga/quadrature.hpp"
#include "iga/sparse.hpp"
#include "iga/splines.hpp"

namespace iga {

/// Active elements for a masked column-wise assembly sweep over the first
/// parametric direction. Per column the active elements of the remaining
/// dimensions are either the whole slab or one of a small set of shared
/// planes (sorted flat indices, first remaining direction fastest).
struct ElementMask {
  static constexpr int kAllActive = -1;

  int dim = 0;
  int nel = 0;
  std::vector<int> column_plane;           // per column: kAllActive or plane index
  std::vector<std::vector<int>> planes;

  bool fully_active_column(int c) const { return column_plane[c] == kAllActive; }
  const std::vector<int>& plane(int c) const { return planes[column_plane[c]]; }

  static ElementMask all_active(int dim, int nel) {
    ElementMask m;
    m.dim = dim;
    m.nel = nel;
    m.column_plane.assign(nel, kAllActive);
    return m;
  }
};

namespace detail {

/// Band layout of a tensor-product space: one slot per offset
/// delta in {-p..p}^dim, enumerated so that the flat column shifts are
/// strictly ascending.
struct BandLayout {
  int dim = 0;
  int p = 0;
  int slots = 0;
  std::vector<long long> shifts;                // per slot
  std::vector<std::array<int, 3>> deltas;       // per slot

  static BandLayout make(const TensorSpace& space) {
    BandLayout l;
    l.dim = space.dim;
    l.p = space.degree();
    const int w = 2 * l.p + 1;
    l.slots = 1;
    for (int d = 0; d < l.dim; ++d) l.slots *= w;
    l.shifts.resize(l.slots);
    l.deltas.resize(l.slots);
    for (int s = 0; s < l.slots; ++s) {
      int rem = s;
      long long shift = 0;
      long long stride = 1;
      std::array<int, 3> delta{0, 0, 0};
      for (int d = 0; d < l.dim; ++d) {
        delta[d] = rem % w - l.p;
        rem /= w;
        shift += static_cast<long long>(delta[d]) * stride;
        stride *= space.dofs_per_dim;
      }
      l.shifts[s] = shift;
      l.deltas[s] = delta;
    }
    return l;
  }

  int slot_of(const std::array<int, 3>& delta) const {
    const int w = 2 * p + 1;
    int s = 0;
    for (int d = dim - 1; d >= 0; --d) s = s * w + (delta[d] + p);
    return s;
  }
};

/// Dense (rows x slots) accumulator; final matrices are emitted as CSR whose
/// pattern is every structurally valid band position.
struct BandMatrix {
  long long rows = 0;
  int slots = 0;
  std::vector<double> data;

  BandMatrix(long long rows_, int slots_) : rows(rows_), slots(slots_) {
    data.assign(rows * static_cast<long long>(slots), 0.0);
  }
  void add(long long row, int slot, double v) { data[row * slots + slot] += v; }
  double at(long long row, int slot) const { return data[row * slots + slot]; }
};

inline SparseMatrix band_to_csr(const TensorSpace& space, const BandLayout& layout,
                                const BandMatrix& band) {
  const int n = static_cast<int>(space.num_dofs);
  const int nd = space.dofs_per_dim;
  const int w = 2 * layout.p + 1;
  // Per-direction validity of each delta component for each dof index.
  std::vector<signed char> comp_valid(static_cast<std::size_t>(nd) * w, 0);
  for (int i = 0; i < nd; ++i)
    for (int dd = -layout.p; dd <= layout.p; ++dd)
      comp_valid[static_cast<std::size_t>(i) * w + dd + layout.p] =
          (i + dd >= 0 && i + dd < nd) ? 1 : 0;
  const auto slot_valid = [&](const std::array<int, 3>& multi, int s) {
    bool ok = true;
    for (int d = 0; d < space.dim; ++d)
      ok = ok &&
           comp_valid[static_cast<std::size_t>(multi[d]) * w + layout.deltas[s][d] + layout.p];
    return ok;
  };
  std::vector<long long> row_ptr(n + 1, 0);
  std::array<int, 3> multi{0, 0, 0};
  for (int row = 0; row < n; ++row) {
    int c = 0;
    for (int s = 0; s < layout.slots; ++s)
      if (slot_valid(multi, s)) ++c;
    row_ptr[row + 1] = row_ptr[row] + c;
    for (int d = 0; d < space.dim; ++d) {
      if (++multi[d] < nd) break;
      multi[d] = 0;
    }
  }
  const long long nnz = row_ptr[n];
  std::vector<int> cols(nnz);
  std::vector<double> values(nnz);
  multi = {0, 0, 0};
  long long k = 0;
  for (int row = 0; row < n; ++row) {
    for (int s = 0; s < layout.slots; ++s) {
      if (!slot_valid(multi, s)) continue;
      cols[k] = static_cast<int>(row + layout.shifts[s]);
      values[k] = band.at(row, s);
      ++k;
    }
    for (int d = 0; d < space.dim; ++d) {
      if (++multi[d] < nd) break;
      multi[d] = 0;
    }
  }
  return SparseMatrix::from_csr(n, std::move(row_ptr), std::move(cols), std::move(values));
}

/// Shared per-element quadrature kernel: 1D basis tables, geometry metrics,
/// and the local Laplace matrix (upper triangle in local ordering).
struct ElementKernel {
  const TensorSpace& space;
  const PatchMap& geom;
  const GaussRule& rule;
  int dim, p, m, nloc;
  std::vector<double> val, der;      // [d][node][p+1]
  std::vector<double> grads;         // [a][dim] at one quadrature point
  std::vector<double> local;         // nloc x nloc, upper triangle filled
  std::vector<long long> local_offsets;
  std::vector<double> weight_products;

  ElementKernel(const TensorSpace& s, const PatchMap& g, const GaussRule& r)
      : space(s), geom(g), rule(r), dim(s.dim), p(s.degree()), m(r.points) {
    nloc = 1;
    for (int d = 0; d < dim; ++d) nloc *= p + 1;
    val.resize(static_cast<std::size_t>(dim) * m * (p + 1));
    der.resize(val.size());
    grads.resize(static_cast<std::size_t>(nloc) * dim);
    local.resize(static_cast<std::size_t>(nloc) * nloc);
    local_offsets.resize(nloc);
    for (int a = 0; a < nloc; ++a) {
      int rem = a;
      long long off = 0, stride = 1;
      for (int d = 0; d < dim; ++d) {
        off += static_cast<long long>(rem % (p + 1)) * stride;
        rem /= p + 1;
        stride *= space.dofs_per_dim;
      }
      local_offsets[a] = off;
    }
  }

  double* val_at(int d, int node) { return val.data() + ((d * m) + node) * (p + 1); }
  double* der_at(int d, int node) { return der.data() + ((d * m) + node) * (p + 1); }

  /// Fills `local` (upper triangle) for one element; returns the flat index
  /// of the element's first dof.
  long long compute(const std::array<int, 3>& elem) {
    const double h = space.kv.spacing;
    for (int d = 0; d < dim; ++d)
      for (int g = 0; g < m; ++g) {
        std::span<double> v(val_at(d, g), p + 1);
        std::span<double> dv(der_at(d, g), p + 1);
        eval_basis(space.kv, (elem[d] + rule.nodes[g]) * h, v, dv);
      }
    std::fill(local.begin(), local.end(), 0.0);

    std::array<int, 3> q{0, 0, 0};
    std::array<double, 3> xhat{0, 0, 0};
    const int nq = [&] {
      int t = 1;
      for (int d = 0; d < dim; ++d) t *= m;
      return t;
    }();
    double hn = 1.0;
    for (int d = 0; d < dim; ++d) hn *= h;
    Vec3 value;
    Mat3 J;
    for (int k = 0; k < nq; ++k) {
      double w = hn;
      for (int d = 0; d < dim; ++d) {
        xhat[d] = (elem[d] + rule.nodes[q[d]]) * h;
        w *= rule.weights[q[d]];
      }
      eval_patch(geom, std::span<const double>(xhat.data(), dim), value, J);
      Mat3 K = pullback_from_jacobian(J, dim);
      for (double& e : K) e *= w;

      for (int a = 0; a < nloc; ++a) {
        int rem = a;
        double* ga = grads.data() + static_cast<std::size_t>(a) * dim;
        for (int c = 0; c < dim; ++c) ga[c] = 1.0;
        for (int d = 0; d < dim; ++d) {
          const int ad = rem % (p + 1);
          rem /= p + 1;
          const double* vd = val_at(d, q[d]);
          const double* dd = der_at(d, q[d]);
          for (int c = 0; c < dim; ++c) ga[c] *= (c == d) ? dd[ad] : vd[ad];
        }
      }
      for (int a = 0; a < nloc; ++a) {
        const double* ga = grads.data() + static_cast<std::size_t>(a) * dim;
        std::array<double, 3> t{0, 0, 0};
        for (int i = 0; i < dim; ++i) {
          double s = 0.0;
          for (int j = 0; j < dim; ++j) s += K[i * 3 + j] * ga[j];
          t[i] = s;
        }
        double* row = local.data() + static_cast<std::size_t>(a) * nloc;
        for (int b = a; b < nloc; ++b) {
          const double* gb = grads.data() + static_cast<std::size_t>(b) * dim;
          double s = 0.0;
          for (int i = 0; i < dim; ++i) s += t[i] * gb[i];
          row[b] += s;
        }
      }
      for (int d = 0; d < dim; ++d) {
        if (++q[d] < m) break;
        q[d] = 0;
      }
    }
    long long base = 0;
    for (int d = dim - 1; d >= 0; --d) base = base * space.dofs_per_dim + elem[d];
    return base;
  }
};

/// Iterates the active elements of one column in ascending remaining-dim
/// order, invoking f(elem_multi).
template <typename F>
inline void for_each_active_element(const TensorSpace& space, const ElementMask* mask, int c,
                                    F&& f) {
  const int nel = space.elements_per_dim();
  std::array<int, 3> e{c, 0, 0};
  if (space.dim == 2) {
    if (mask == nullptr || mask->fully_active_column(c)) {
      for (int e1 = 0; e1 < nel; ++e1) {
        e[1] = e1;
        f(e);
      }
    } else {
      for (int e1 : mask->plane(c)) {
        e[1] = e1;
        f(e);
      }
    }
    return;
  }
  if (mask == nullptr || mask->fully_active_column(c)) {
    for (int e2 = 0; e2 < nel; ++e2)
      for (int e1 = 0; e1 < nel; ++e1) {
        e[1] = e1;
        e[2] = e2;
        f(e);
      }
  } else {
    for (int flat : mask->plane(c)) {
      e[1] = flat % nel;
      e[2] = flat / nel;
      f(e);
    }
  }
}

}  // namespace detail

/// Dense element stiffness matrix (reference-domain gradients against the
/// pulled-back coefficient) together with the global dof indices it couples.
struct LocalStiffness {
  int nloc = 0;
  std::vector<double> matrix;      // nloc x nloc, row-major, symmetric
  std::vector<long long> dofs;
};

inline LocalStiffness local_stiffness(const TensorSpace& space, const PatchMap& geom,
                                      std::span<const int> element, const GaussRule& rule) {
  const int nel = space.elements_per_dim();
  std::array<int, 3> e{0, 0, 0};
  for (int d = 0; d < space.dim; ++d) {
    if (element[d] < 0 || element[d] >= nel)
      throw std::invalid_argument("local_stiffness: element index out of range");
    e[d] = element[d];
  }
  detail::ElementKernel kernel(space, geom, rule);
  const long long base = kernel.compute(e);
  LocalStiffness out;
  out.nloc = kernel.nloc;
  out.matrix.resize(static_cast<std::size_t>(kernel.nloc) * kernel.nloc);
  out.dofs.resize(kernel.nloc);
  for (int a = 0; a < kernel.nloc; ++a) out.dofs[a] = base + kernel.local_offsets[a];
  for (int a = 0; a < kernel.nloc; ++a)
    for (int b = a; b < kernel.nloc; ++b) {
      const double v = kernel.local[static_cast<std::size_t>(a) * kernel.nloc + b];
      out.matrix[static_cast<std::size_t>(a) * kernel.nloc + b] = v;
      out.matrix[static_cast<std::size_t>(b) * kernel.nloc + a] = v;
    }
  return out;
}

namespace detail {

/// Assembles the band accumulator over the rows whose first-direction dof
/// component lies in [row0, row1). Column sweep order matches the
/// single-threaded full assembly, so owned positions accumulate their
/// contributions in an identical order regardless of the thread count.
inline void assemble_band_rows(const TensorSpace& space, const PatchMap& geom,
                               const GaussRule& rule, const ElementMask* mask,
                               const BandLayout& layout, BandMatrix& band, int row0, int row1) {
  const int nel = space.elements_per_dim();
  const int p = space.degree();
  ElementKernel kernel(space, geom, rule);
  const int nloc = kernel.nloc;
  // Per local-pair slots, element independent.
  std::vector<int> slot_ab(static_cast<std::size_t>(nloc) * nloc),
      slot_ba(static_cast<std::size_t>(nloc) * nloc);
  for (int a = 0; a < nloc; ++a)
    for (int b = a; b < nloc; ++b) {
      std::array<int, 3> da{0, 0, 0}, db{0, 0, 0};
      int ra = a, rb = b;
      for (int d = 0; d < space.dim; ++d) {
        da[d] = ra % (p + 1);
        ra /= p + 1;
        db[d] = rb % (p + 1);
        rb /= p + 1;
      }
      std::array<int, 3> delta{0, 0, 0}, neg{0, 0, 0};
      for (int d = 0; d < space.dim; ++d) {
        delta[d] = db[d] - da[d];
        neg[d] = -delta[d];
      }
      slot_ab[static_cast<std::size_t>(a) * nloc + b] = layout.slot_of(delta);
      slot_ba[static_cast<std::size_t>(a) * nloc + b] = layout.slot_of(neg);
    }
  // First-direction local index of each local dof.
  std::vector<int> first_comp(nloc);
  for (int a = 0; a < nloc; ++a) first_comp[a] = a % (p + 1);

  const int c_begin = std::max(0, row0 - p);
  const int c_end = std::min(nel, row1);
  for (int c = c_begin; c < c_end; ++c) {
    for_each_active_element(space, mask, c, [&](const std::array<int, 3>& elem) {
      const long long base = kernel.compute(elem);
      for (int a = 0; a < nloc; ++a) {
        const bool own_a = (c + first_comp[a] >= row0) && (c + first_comp[a] < row1);
        const long long ga = base + kernel.local_offsets[a];
        const double* lrow = kernel.local.data() + static_cast<std::size_t>(a) * nloc;
        for (int b = a; b < nloc; ++b) {
          const double v = lrow[b];
          if (own_a) band.add(ga, slot_ab[static_cast<std::size_t>(a) * nloc + b], v);
          if (a != b && (c + first_comp[b] >= row0) && (c + first_comp[b] < row1))
            band.add(base + kernel.local_offsets[b],
                     slot_ba[static_cast<std::size_t>(a) * nloc + b], v);
        }
      }
    });
  }
}

inline BandMatrix assemble_band(const TensorSpace& space, const PatchMap& geom,
                                const GaussRule& rule, const ElementMask* mask,
                                const BandLayout& layout, int threads) {
  BandMatrix band(space.num_dofs, layout.slots);
  const int nd = space.dofs_per_dim;
  if (threads <= 1) {
    assemble_band_rows(space, geom, rule, mask, layout, band, 0, nd);
    return band;
  }
  threads = std::min<int>(threads, nd);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int r0 = static_cast<int>(static_cast<long long>(nd) * t / threads);
    const int r1 = static_cast<int>(static_cast<long long>(nd) * (t + 1) / threads);
    pool.emplace_back([&, r0, r1] {
      assemble_band_rows(space, geom, rule, mask, layout, band, r0, r1);
    });
  }
  for (auto& th : pool) th.join();
  return band;
}

}  // namespace detail

/// Galerkin stiffness assembly over all elements, or over the active elements
/// of a mask. Masked entries whose basis-function supports are entirely
/// active agree bit for bit with the unmasked matrix; the remaining entries
/// are partial sums. The sweep is column-wise over the first direction.
inline SparseMatrix assemble_stiffness(const TensorSpace& space, const PatchMap& geom,
                                       const GaussRule& rule,
                                       const ElementMask* mask = nullptr, int threads = 1) {
  if (mask != nullptr && (mask->dim != space.dim || mask->nel != space.elements_per_dim()))
    throw std::invalid_argument("assemble_stiffness: mask does not match the space");
  const auto layout = detail::BandLayout::make(space);
  const auto band = detail::assemble_band(space, geom, rule, mask, layout, threads);
  return detail::band_to_csr(space, layout, band);
}

}  // namespace iga
