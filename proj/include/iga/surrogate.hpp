#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iga/assembly.hpp"
#include "iga/interpolation.hpp"
#include "iga/sparse.hpp"
#include "iga/splines.hpp"

namespace iga {

/// Parameters of the surrogate assembly: sampling stride M (sampling length
/// H = M*h) and spline interpolation degree q of the stencil interpolants.
struct SurrogateConfig {
  int skip = 10;
  int degree = 3;
};

/// Near-boundary element set
///   B = {1,...,2p} u {nel-(2p-1),...,nel}   (1-based)
/// returned 0-based; every quoted 1-based set is converted at this boundary.
inline std::vector<int> boundary_mask(int p, int nel) {
  if (p < 1) throw std::invalid_argument("boundary_mask: degree must be >= 1");
  if (nel <= 4 * p)
    throw std::invalid_argument("boundary_mask: need num_elements > 4*degree, got " +
                                std::to_string(nel) + " with degree " + std::to_string(p));
  std::vector<int> mask;
  mask.reserve(4 * p);
  for (int e = 0; e < 2 * p; ++e) mask.push_back(e);
  for (int e = nel - 2 * p; e < nel; ++e) mask.push_back(e);
  return mask;
}

/// Interior sample indices on the unit lattice of L points:
/// every M-th point plus the reinserted endpoint L-1.
inline std::vector<int> sample_indices(int L, int M) {
  if (L < 2) throw std::invalid_argument("sample_indices: lattice needs at least 2 points");
  if (M < 1) throw std::invalid_argument("sample_indices: skip parameter must be >= 1");
  std::vector<int> s;
  for (int k = 0; k <= (L - 1) / M; ++k) s.push_back(k * M);
  if (s.back() != L - 1) s.push_back(L - 1);
  return s;
}

/// Active element set of the interior sweep: the union of the p+1 element
/// support patches of all sample points and the near-boundary set B,
/// sorted and duplicate free (0-based).
inline std::vector<int> interior_mask(int p, int M, int nel) {
  std::vector<int> mask = boundary_mask(p, nel);
  const int L = nel - 3 * p;
  for (int s : sample_indices(L, M))
    for (int e = s + p; e <= s + 2 * p; ++e) mask.push_back(e);
  std::sort(mask.begin(), mask.end());
  mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
  return mask;
}

namespace detail {

inline std::vector<char> membership(std::span<const int> set, int n) {
  std::vector<char> in(n, 0);
  for (int e : set) in[e] = 1;
  return in;
}

}  // namespace detail

/// Column masks of the surrogate sweep. A column whose index lies in B is
/// fully active. Any other column keeps the near-boundary frame active
/// (elements with some remaining-dimension index in B, so that every matrix
/// entry coupling a boundary-adjacent function stays exact), and a column
/// inside an interior patch additionally activates the tensor product of the
/// interior masks of the remaining dimensions.
inline ElementMask surrogate_element_mask(int p, int M, int nel, int dim) {
  const std::vector<int> bnd = boundary_mask(p, nel);
  const std::vector<int> interior = interior_mask(p, M, nel);
  const auto in_bnd = detail::membership(bnd, nel);
  const auto in_interior = detail::membership(interior, nel);

  ElementMask mask;
  mask.dim = dim;
  mask.nel = nel;
  if (dim == 2) {
    mask.planes.push_back(bnd);       // plane 0: boundary rows only
    mask.planes.push_back(interior);  // plane 1: interior patches + boundary rows
  } else {
    std::vector<int> frame, frame_plus;
    for (int e2 = 0; e2 < nel; ++e2)
      for (int e1 = 0; e1 < nel; ++e1) {
        const bool in_frame = in_bnd[e1] || in_bnd[e2];
        if (in_frame) frame.push_back(e1 + nel * e2);
        if (in_frame || (in_interior[e1] && in_interior[e2]))
          frame_plus.push_back(e1 + nel * e2);
      }
    mask.planes.push_back(std::move(frame));
    mask.planes.push_back(std::move(frame_plus));
  }
  mask.column_plane.resize(nel);
  for (int c = 0; c < nel; ++c)
    mask.column_plane[c] =
        in_bnd[c] ? ElementMask::kAllActive : (in_interior[c] ? 1 : 0);
  return mask;
}

/// Mask with only the near-boundary elements active (no interior patches).
inline ElementMask boundary_element_mask(int p, int nel, int dim) {
  const std::vector<int> bnd = boundary_mask(p, nel);
  const auto in_bnd = detail::membership(bnd, nel);
  ElementMask mask;
  mask.dim = dim;
  mask.nel = nel;
  if (dim == 2) {
    mask.planes.push_back(bnd);
  } else {
    std::vector<int> frame;
    for (int e2 = 0; e2 < nel; ++e2)
      for (int e1 = 0; e1 < nel; ++e1)
        if (in_bnd[e1] || in_bnd[e2]) frame.push_back(e1 + nel * e2);
    mask.planes.push_back(std::move(frame));
  }
  mask.column_plane.resize(nel);
  for (int c = 0; c < nel; ++c)
    mask.column_plane[c] = in_bnd[c] ? ElementMask::kAllActive : 0;
  return mask;
}

/// Offset of a stencil function: the translation delta between two lattice
/// points, in lattice index units per direction.
struct ShiftIndex {
  std::array<int, 3> delta{0, 0, 0};
};

inline long long flat_shift(const ShiftIndex& s, const TensorSpace& space) {
  long long shift = 0, stride = 1;
  for (int d = 0; d < space.dim; ++d) {
    shift += static_cast<long long>(s.delta[d]) * stride;
    stride *= space.dofs_per_dim;
  }
  return shift;
}

/// All (2p+1)^dim stencil offsets, ordered by ascending flat shift.
inline std::vector<ShiftIndex> enumerate_shifts(int p, int dim) {
  const int w = 2 * p + 1;
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= w;
  std::vector<ShiftIndex> shifts(total);
  for (int s = 0; s < total; ++s) {
    int rem = s;
    for (int d = 0; d < dim; ++d) {
      shifts[s].delta[d] = rem % w - p;
      rem /= w;
    }
  }
  return shifts;
}

/// Number of stencil functions actually interpolated: only the strictly
/// positive shifts, the rest follow by symmetry and the diagonal from the
/// row-sum correction.
inline int count_interpolated_stencils(int p, int dim) {
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= 2 * p + 1;
  return (total - 1) / 2;
}

/// Flat dof indices of all sample lattice points (ascending). With
/// `truncate` set, only rows below (2p+1)*(nel+p) are kept, which is enough
/// to derive the element masks from basis-function supports.
inline std::vector<long long> active_row_subset(const TensorSpace& space,
                                                const InteriorLattice& lattice,
                                                std::span<const int> samples,
                                                bool truncate = false) {
  std::vector<long long> rows;
  const int ns = static_cast<int>(samples.size());
  long long total = 1;
  for (int d = 0; d < space.dim; ++d) total *= ns;
  rows.reserve(total);
  const long long bound =
      static_cast<long long>(2 * space.degree() + 1) * space.dofs_per_dim;
  std::array<int, 3> idx{0, 0, 0};
  for (long long k = 0; k < total; ++k) {
    long long flat = 0;
    for (int d = space.dim - 1; d >= 0; --d)
      flat = flat * space.dofs_per_dim + (samples[idx[d]] + lattice.offset);
    if (!truncate || flat < bound) rows.push_back(flat);
    for (int d = 0; d < space.dim; ++d) {
      if (++idx[d] < ns) break;
      idx[d] = 0;
    }
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

/// Stencil function samples for one shift: the matrix entries
/// A[i, i+shift] over the sample lattice, arranged on the sample grid.
struct StencilSampleGrid {
  ShiftIndex shift;
  int dim = 0;
  std::vector<int> samples;                    // per-direction sample indices
  std::array<std::vector<double>, 3> coords;   // unit-interval sample coordinates
  std::vector<double> values;                  // |samples|^dim, first direction fastest
};

inline StencilSampleGrid extract_stencil_samples(const SparseMatrix& partial,
                                                 const TensorSpace& space,
                                                 const InteriorLattice& lattice,
                                                 const ShiftIndex& shift,
                                                 std::span<const int> samples) {
  StencilSampleGrid grid;
  grid.shift = shift;
  grid.dim = space.dim;
  grid.samples.assign(samples.begin(), samples.end());
  for (int d = 0; d < space.dim; ++d) {
    grid.coords[d].resize(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
      grid.coords[d][k] = lattice.coord(samples[k]);
  }
  const int ns = static_cast<int>(samples.size());
  long long total = 1;
  for (int d = 0; d < space.dim; ++d) total *= ns;
  grid.values.resize(total);
  const long long fshift = flat_shift(shift, space);
  std::array<int, 3> idx{0, 0, 0};
  for (long long k = 0; k < total; ++k) {
    long long row = 0;
    for (int d = space.dim - 1; d >= 0; --d) {
      const int comp = samples[idx[d]] + lattice.offset;
      if (comp + shift.delta[d] < 0 || comp + shift.delta[d] >= space.dofs_per_dim)
        throw std::logic_error("extract_stencil_samples: shift leaves the dof grid");
      row = row * space.dofs_per_dim + comp;
    }
    grid.values[k] = partial.value_at(static_cast<int>(row), static_cast<int>(row + fshift));
    for (int d = 0; d < space.dim; ++d) {
      if (++idx[d] < ns) break;
      idx[d] = 0;
    }
  }
  return grid;
}

/// Interpolates one sampled stencil function onto the full interior lattice.
inline std::vector<double> interpolate_stencil(const StencilSampleGrid& grid, int q,
                                               const InteriorLattice& lattice) {
  std::array<std::vector<double>, 3> coords;
  for (int d = 0; d < grid.dim; ++d) coords[d] = grid.coords[d];
  GridInterpolant interp(grid.dim, std::move(coords), grid.values, q);
  std::array<std::vector<double>, 3> queries;
  for (int d = 0; d < grid.dim; ++d) {
    queries[d].resize(lattice.size);
    for (int k = 0; k < lattice.size; ++k) queries[d][k] = lattice.coord(k);
  }
  return interp.evaluate_grid(queries);
}

/// One interpolated stencil: its offset and its values on the full lattice.
struct StencilInterpolant {
  ShiftIndex shift;
  std::vector<double> lattice_values;  // L^dim, first direction fastest
};

namespace detail {

inline long long lattice_flat(const TensorSpace& space, const InteriorLattice& lattice,
                              const std::array<int, 3>& lat_multi) {
  long long flat = 0;
  for (int d = space.dim - 1; d >= 0; --d) flat = flat * lattice.size + lat_multi[d];
  return flat;
}

}  // namespace detail

/// Combination step on an explicit partial matrix: every pair of lattice
/// points within a stencil offset gets the interpolated value (upper shift
/// mirrored to the lower triangle), all other entries keep their quadrature
/// values, and each diagonal entry is set to the negative off-diagonal row
/// sum, restoring the kernel of the exact matrix.
inline SparseMatrix combine_surrogate(const SparseMatrix& partial, const TensorSpace& space,
                                      const InteriorLattice& lattice,
                                      std::span<const StencilInterpolant> stencils) {
  SparseMatrix result = partial;
  for (const StencilInterpolant& st : stencils) {
    const long long fshift = flat_shift(st.shift, space);
    if (fshift <= 0)
      throw std::invalid_argument("combine_surrogate: stencils must have positive shifts");
    std::array<int, 3> lat{0, 0, 0};
    const long long total = lattice.count();
    for (long long k = 0; k < total; ++k) {
      bool inside = true;
      for (int d = 0; d < space.dim; ++d) {
        const int t = lat[d] + st.shift.delta[d];
        inside = inside && t >= 0 && t < lattice.size;
      }
      if (inside) {
        long long row = 0;
        for (int d = space.dim - 1; d >= 0; --d)
          row = row * space.dofs_per_dim + (lat[d] + lattice.offset);
        const long long col = row + fshift;
        const double v = st.lattice_values[k];
        const long long up = result.find(static_cast<int>(row), static_cast<int>(col));
        const long long lo = result.find(static_cast<int>(col), static_cast<int>(row));
        if (up < 0 || lo < 0)
          throw std::logic_error("combine_surrogate: interpolated position missing from pattern");
        result.set_value(up, v);
        result.set_value(lo, v);
      }
      for (int d = 0; d < space.dim; ++d) {
        if (++lat[d] < lattice.size) break;
        lat[d] = 0;
      }
    }
  }
  for (int i = 0; i < result.size(); ++i) {
    const auto cols = result.row_cols(i);
    const auto vals = result.row_values_mut(i);
    double sum = 0.0;
    long long diag = -1;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i)
        diag = static_cast<long long>(k);
      else
        sum += vals[k];
    }
    if (diag < 0) throw std::logic_error("combine_surrogate: diagonal entry missing");
    vals[diag] = -sum;
  }
  return result;
}

struct SurrogateTimings {
  double masked_assembly_seconds = 0.0;
  double interpolation_seconds = 0.0;
  double combination_seconds = 0.0;
};

namespace detail {

inline void validate_surrogate_config(const TensorSpace& space, const SurrogateConfig& cfg) {
  if (cfg.degree != 1 && cfg.degree != 3)
    throw std::invalid_argument(
        "assemble_surrogate: interpolation degree must be 1 or 3, got " +
        std::to_string(cfg.degree));
  if (cfg.skip < 1)
    throw std::invalid_argument("assemble_surrogate: skip parameter must be >= 1");
  const InteriorLattice lattice = interior_lattice(space);
  const auto samples = sample_indices(lattice.size, cfg.skip);
  if (static_cast<int>(samples.size()) < cfg.degree + 1)
    throw std::invalid_argument(
        "assemble_surrogate: too few samples for interpolation degree (got " +
        std::to_string(samples.size()) + ", need " + std::to_string(cfg.degree + 1) + ")");
}

}  // namespace detail

/// Surrogate stiffness assembly: masked quadrature on the active elements,
/// extraction and interpolation of the positive-shift stencil functions, and
/// the symmetric combination with the zero row-sum diagonal correction.
inline SparseMatrix assemble_surrogate(const TensorSpace& space, const PatchMap& geom,
                                       const GaussRule& rule, const SurrogateConfig& cfg,
                                       int threads = 1, SurrogateTimings* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  detail::validate_surrogate_config(space, cfg);
  const int p = space.degree();
  const int nel = space.elements_per_dim();
  const InteriorLattice lattice = interior_lattice(space);
  const auto samples = sample_indices(lattice.size, cfg.skip);
  const ElementMask mask = surrogate_element_mask(p, cfg.skip, nel, space.dim);
  const auto layout = detail::BandLayout::make(space);

  const auto t0 = clock::now();
  const detail::BandMatrix band =
      detail::assemble_band(space, geom, rule, &mask, layout, threads);
  const auto t1 = clock::now();

  // Extract the sampled stencil values for every positive shift directly from
  // the band store and interpolate them onto the full lattice. The evaluation
  // operator of the 1D interpolant is the same in every direction and for
  // every shift, so it is built once.
  const int ns = static_cast<int>(samples.size());
  long long sample_total = 1;
  for (int d = 0; d < space.dim; ++d) sample_total *= ns;
  std::vector<double> sample_coords(ns), lattice_coords(lattice.size);
  for (int k = 0; k < ns; ++k) sample_coords[k] = lattice.coord(samples[k]);
  for (int k = 0; k < lattice.size; ++k) lattice_coords[k] = lattice.coord(k);
  const std::vector<double> E =
      detail::interpolation_matrix(sample_coords, lattice_coords, cfg.degree);
  // grid_of_slot[s] indexes the interpolated values of slot s when its shift
  // is positive, or of the mirrored slot when negative; -1 on the diagonal.
  std::vector<int> grid_of_slot(layout.slots, -1);
  std::vector<std::vector<double>> interpolated;  // per positive slot, L^dim values
  for (int s = 0; s < layout.slots; ++s) {
    if (layout.shifts[s] <= 0) continue;
    std::array<int, 3> neg{0, 0, 0};
    for (int d = 0; d < space.dim; ++d) neg[d] = -layout.deltas[s][d];
    grid_of_slot[s] = static_cast<int>(interpolated.size());
    grid_of_slot[layout.slot_of(neg)] = grid_of_slot[s];

    std::vector<double> values(sample_total);
    std::array<int, 3> idx{0, 0, 0};
    for (long long k = 0; k < sample_total; ++k) {
      long long row = 0;
      for (int d = space.dim - 1; d >= 0; --d)
        row = row * space.dofs_per_dim + (samples[idx[d]] + lattice.offset);
      values[k] = band.at(row, s);
      for (int d = 0; d < space.dim; ++d) {
        if (++idx[d] < ns) break;
        idx[d] = 0;
      }
    }
    std::array<int, 3> shape{1, 1, 1};
    for (int d = 0; d < space.dim; ++d) shape[d] = ns;
    for (int d = 0; d < space.dim; ++d)
      values = detail::mode_product(values, shape, space.dim, d, E, lattice.size);
    interpolated.push_back(std::move(values));
  }
  const auto t2 = clock::now();

  // Emit the final matrix: band pattern, interpolated values on lattice pairs,
  // quadrature values elsewhere, diagonal as negative off-diagonal row sum.
  // Lattice rows have every slot structurally valid, and rows outside the
  // lattice carry no interpolated entries, which gives two tight loops.
  const int n = static_cast<int>(space.num_dofs);
  const int nd = space.dofs_per_dim;
  const int w = 2 * p + 1;
  const int L = lattice.size;
  std::vector<long long> row_ptr(n + 1, 0);
  std::vector<int> cols;
  std::vector<double> values;
  {
    // Valid slot count per dof component and per-component delta validity.
    std::vector<int> width(nd);
    for (int c = 0; c < nd; ++c) width[c] = std::min(c, p) + std::min(nd - 1 - c, p) + 1;
    std::vector<signed char> comp_ok(static_cast<std::size_t>(nd) * w);
    for (int c = 0; c < nd; ++c)
      for (int dd = -p; dd <= p; ++dd)
        comp_ok[static_cast<std::size_t>(c) * w + dd + p] = (c + dd >= 0 && c + dd < nd);
    // Lattice-box validity of each (lattice component, delta) pair.
    std::vector<signed char> lat_ok(static_cast<std::size_t>(L) * w);
    for (int c = 0; c < L; ++c)
      for (int dd = -p; dd <= p; ++dd)
        lat_ok[static_cast<std::size_t>(c) * w + dd + p] = (c + dd >= 0 && c + dd < L);
    // Per-slot delta components (biased by +p), lattice-flat shifts, and the
    // grid base pointer of each off-diagonal slot. Mirrored slots point into
    // the positive-shift grid offset by their own lattice shift, so a lattice
    // row reads every slot value at its own lattice index.
    std::array<std::vector<int>, 3> dbias;
    for (int d = 0; d < space.dim; ++d) dbias[d].resize(layout.slots);
    std::vector<const double*> grid_ptr(layout.slots, nullptr);
    const int diag_slot = layout.slot_of({0, 0, 0});
    for (int s = 0; s < layout.slots; ++s) {
      long long ls = 0, stride = 1;
      for (int d = 0; d < space.dim; ++d) {
        dbias[d][s] = layout.deltas[s][d] + p;
        ls += static_cast<long long>(layout.deltas[s][d]) * stride;
        stride *= L;
      }
      if (s != diag_slot)
        grid_ptr[s] = interpolated[grid_of_slot[s]].data() +
                      (layout.shifts[s] > 0 ? 0 : ls);
    }

    std::array<int, 3> multi{0, 0, 0};
    for (int row = 0; row < n; ++row) {
      long long count = 1;
      for (int d = 0; d < space.dim; ++d) count *= width[multi[d]];
      row_ptr[row + 1] = row_ptr[row] + count;
      for (int d = 0; d < space.dim; ++d) {
        if (++multi[d] < nd) break;
        multi[d] = 0;
      }
    }
    cols.resize(row_ptr[n]);
    values.resize(row_ptr[n]);
    std::array<int, 3> rmulti{0, 0, 0};
    long long k = 0;
    for (int row = 0; row < n; ++row) {
      const long long row_begin = k;
      long long diag_pos = -1;
      std::array<int, 3> lat{0, 0, 0};
      bool row_in_lattice = true;
      for (int d = 0; d < space.dim; ++d) {
        lat[d] = rmulti[d] - lattice.offset;
        row_in_lattice = row_in_lattice && lat[d] >= 0 && lat[d] < L;
      }
      double sum = 0.0;
      if (row_in_lattice) {
        long long lrow = 0;
        for (int d = space.dim - 1; d >= 0; --d) lrow = lrow * L + lat[d];
        const signed char* ok0 = lat_ok.data() + static_cast<std::size_t>(lat[0]) * w;
        const signed char* ok1 = lat_ok.data() + static_cast<std::size_t>(lat[1]) * w;
        const signed char* ok2 =
            space.dim == 3 ? lat_ok.data() + static_cast<std::size_t>(lat[2]) * w : nullptr;
        const double* brow = band.data.data() + static_cast<long long>(row) * layout.slots;
        for (int s = 0; s < layout.slots; ++s) {
          if (s == diag_slot) {
            cols[k] = row;
            diag_pos = k++;
            continue;
          }
          bool pair_in_lattice = ok0[dbias[0][s]] && ok1[dbias[1][s]];
          if (ok2 != nullptr) pair_in_lattice = pair_in_lattice && ok2[dbias[2][s]];
          const double v = pair_in_lattice ? grid_ptr[s][lrow] : brow[s];
          cols[k] = static_cast<int>(row + layout.shifts[s]);
          values[k] = v;
          sum += v;
          ++k;
        }
      } else {
        const signed char* ok0 = comp_ok.data() + static_cast<std::size_t>(rmulti[0]) * w;
        const signed char* ok1 = comp_ok.data() + static_cast<std::size_t>(rmulti[1]) * w;
        const signed char* ok2 =
            space.dim == 3 ? comp_ok.data() + static_cast<std::size_t>(rmulti[2]) * w
                           : nullptr;
        const double* brow = band.data.data() + static_cast<long long>(row) * layout.slots;
        for (int s = 0; s < layout.slots; ++s) {
          bool ok = ok0[dbias[0][s]] && ok1[dbias[1][s]];
          if (ok2 != nullptr) ok = ok && ok2[dbias[2][s]];
          if (!ok) continue;
          if (s == diag_slot) {
            cols[k] = row;
            diag_pos = k++;
            continue;
          }
          const double v = brow[s];
          cols[k] = static_cast<int>(row + layout.shifts[s]);
          values[k] = v;
          sum += v;
          ++k;
        }
      }
      (void)row_begin;
      values[diag_pos] = -sum;
      for (int d = 0; d < space.dim; ++d) {
        if (++rmulti[d] < nd) break;
        rmulti[d] = 0;
      }
    }
  }
  const auto t3 = clock::now();
  if (timings != nullptr) {
    timings->masked_assembly_seconds = std::chrono::duration<double>(t1 - t0).count();
    timings->interpolation_seconds = std::chrono::duration<double>(t2 - t1).count();
    timings->combination_seconds = std::chrono::duration<double>(t3 - t2).count();
  }
  return SparseMatrix::from_csr(n, std::move(row_ptr), std::move(cols), std::move(values));
}

}  // namespace iga
