#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "iga/assembly.hpp"
#include "iga/geometry.hpp"
#include "iga/quadrature.hpp"
#include "iga/sparse.hpp"
#include "iga/splines.hpp"

namespace iga {

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// Manufactured Poisson case: exact solution u, its gradient, and the load
/// f = -Laplace(u), all on physical coordinates.
struct ManufacturedCase {
  int dim = 0;
  std::string name;
  ScalarField u;
  VectorField grad_u;
  ScalarField f;
};

/// `oscillatory` uses the product of sin(20 pi x_d) factors, `smooth` the
/// product of sin(pi x_d) factors.
inline ManufacturedCase manufactured_case(const std::string& name, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("manufactured_case: dim must be 2 or 3");
  double freq = 0.0;
  if (name == "oscillatory")
    freq = 20.0 * M_PI;
  else if (name == "smooth")
    freq = M_PI;
  else
    throw std::invalid_argument("manufactured_case: unknown case '" + name + "'");
  ManufacturedCase mc;
  mc.dim = dim;
  mc.name = name;
  mc.u = [dim, freq](const Vec3& x) {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) v *= std::sin(freq * x[d]);
    return v;
  };
  mc.grad_u = [dim, freq](const Vec3& x) {
    Vec3 g{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      double v = freq;
      for (int k = 0; k < dim; ++k)
        v *= (k == d) ? std::cos(freq * x[k]) : std::sin(freq * x[k]);
      g[d] = v;
    }
    return g;
  };
  mc.f = [dim, freq](const Vec3& x) {
    double v = dim * freq * freq;
    for (int d = 0; d < dim; ++d) v *= std::sin(freq * x[d]);
    return v;
  };
  return mc;
}

namespace detail {

template <typename Body>
inline void run_row_chunks(int total, int threads, Body&& body) {
  if (threads <= 1) {
    body(0, total, 0);
    return;
  }
  threads = std::min(threads, total);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int r0 = static_cast<int>(static_cast<long long>(total) * t / threads);
    const int r1 = static_cast<int>(static_cast<long long>(total) * (t + 1) / threads);
    pool.emplace_back([&body, r0, r1, t] { body(r0, r1, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Load vector b_i = integral of f(phi(x)) N_i(x) |det Dphi(x)| dx by element
/// quadrature.
inline std::vector<double> assemble_load(const TensorSpace& space, const PatchMap& geom,
                                         const GaussRule& rule, const ScalarField& f,
                                         int threads = 1) {
  const int p = space.degree();
  const int nel = space.elements_per_dim();
  const int m = rule.points;
  const int dim = space.dim;
  std::vector<double> b(space.num_dofs, 0.0);
  detail::run_row_chunks(space.dofs_per_dim, threads, [&](int row0, int row1, int) {
    std::vector<double> val(static_cast<std::size_t>(dim) * m * (p + 1));
    std::vector<double> der(val.size());
    auto val_at = [&](int d, int g) { return val.data() + ((d * m) + g) * (p + 1); };
    auto der_at = [&](int d, int g) { return der.data() + ((d * m) + g) * (p + 1); };
    int nloc = 1, nq = 1;
    for (int d = 0; d < dim; ++d) {
      nloc *= p + 1;
      nq *= m;
    }
    std::vector<long long> offsets(nloc);
    std::vector<int> first_comp(nloc);
    for (int a = 0; a < nloc; ++a) {
      int rem = a;
      long long off = 0, stride = 1;
      for (int d = 0; d < dim; ++d) {
        if (d == 0) first_comp[a] = rem % (p + 1);
        off += static_cast<long long>(rem % (p + 1)) * stride;
        rem /= p + 1;
        stride *= space.dofs_per_dim;
      }
      offsets[a] = off;
    }
    const double h = space.kv.spacing;
    double hn = 1.0;
    for (int d = 0; d < dim; ++d) hn *= h;
    std::array<int, 3> elem{0, 0, 0};
    const int c0 = std::max(0, row0 - p), c1 = std::min(nel, row1);
    for (int c = c0; c < c1; ++c) {
      elem[0] = c;
      long long rest_total = 1;
      for (int d = 1; d < dim; ++d) rest_total *= nel;
      for (long long r = 0; r < rest_total; ++r) {
        long long rem = r;
        for (int d = 1; d < dim; ++d) {
          elem[d] = static_cast<int>(rem % nel);
          rem /= nel;
        }
        for (int d = 0; d < dim; ++d)
          for (int g = 0; g < m; ++g) {
            std::span<double> v(val_at(d, g), p + 1);
            std::span<double> dv(der_at(d, g), p + 1);
            eval_basis(space.kv, (elem[d] + rule.nodes[g]) * h, v, dv);
          }
        long long base = 0;
        for (int d = dim - 1; d >= 0; --d) base = base * space.dofs_per_dim + elem[d];
        std::array<int, 3> q{0, 0, 0};
        std::array<double, 3> xhat{0, 0, 0};
        Vec3 value;
        Mat3 J;
        for (int k = 0; k < nq; ++k) {
          double w = hn;
          for (int d = 0; d < dim; ++d) {
            xhat[d] = (elem[d] + rule.nodes[q[d]]) * h;
            w *= rule.weights[q[d]];
          }
          detail::eval_patch(geom, std::span<const double>(xhat.data(), dim), value, J);
          const double fw = f(value) * std::abs(detail::det_dim(J, dim)) * w;
          for (int a = 0; a < nloc; ++a) {
            if (c + first_comp[a] < row0 || c + first_comp[a] >= row1) continue;
            int rem2 = a;
            double shape = 1.0;
            for (int d = 0; d < dim; ++d) {
              shape *= val_at(d, q[d])[rem2 % (p + 1)];
              rem2 /= p + 1;
            }
            b[base + offsets[a]] += fw * shape;
          }
          for (int d = 0; d < dim; ++d) {
            if (++q[d] < m) break;
            q[d] = 0;
          }
        }
      }
    }
  });
  return b;
}

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradients with diagonal (Jacobi) preconditioning. Convergence is
/// accepted only after the true residual satisfies ||b - Ax|| <= tol ||b||.
inline CgResult cg_solve(const SparseMatrix& A, std::span<const double> b, double tol,
                         long long max_iterations = -1) {
  const int n = A.size();
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("cg_solve: size mismatch");
  if (max_iterations < 0) max_iterations = 10LL * n;
  CgResult res;
  res.x.assign(n, 0.0);
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return res;

  std::vector<double> diag = A.diagonal();
  for (double d : diag)
    if (!(d > 0.0)) throw std::runtime_error("cg_solve: non-positive diagonal entry");

  std::vector<double> r(b.begin(), b.end()), z(n), q(n), pvec(n);
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  pvec = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  for (long long it = 1; it <= max_iterations; ++it) {
    A.multiply(pvec, q);
    double pq = 0.0;
    for (int i = 0; i < n; ++i) pq += pvec[i] * q[i];
    if (!(pq > 0.0))
      throw std::runtime_error("cg_solve: negative curvature, matrix not positive definite");
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) res.x[i] += alpha * pvec[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * q[i];
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);
    if (rnorm <= tol * bnorm) {
      // Recompute the true residual before accepting.
      A.multiply(res.x, q);
      for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
      rnorm = 0.0;
      for (double v : r) rnorm += v * v;
      rnorm = std::sqrt(rnorm);
      if (rnorm <= tol * bnorm) {
        res.iterations = static_cast<int>(it);
        res.relative_residual = rnorm / bnorm;
        return res;
      }
    }
    double rz_next = 0.0;
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    for (int i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) pvec[i] = z[i] + beta * pvec[i];
  }
  throw std::runtime_error("cg_solve: no convergence within the iteration limit");
}

/// Dirichlet data and the reduced interior system
///   A_II u_I = b_I - A_IB u_B
/// with the boundary coefficients u_B determined by an L2 projection of g
/// onto the boundary trace space (one coupled system over all faces).
struct DirichletSystem {
  std::vector<int> interior;          // interior dof indices (ascending)
  std::vector<int> boundary;          // boundary dof indices (ascending)
  std::vector<double> boundary_values;
  SparseMatrix reduced;
  std::vector<double> rhs;
};

namespace detail {

inline bool is_boundary_dof(const TensorSpace& space, long long flat) {
  const auto multi = space.dof_multi(flat);
  for (int d = 0; d < space.dim; ++d)
    if (multi[d] == 0 || multi[d] == space.dofs_per_dim - 1) return true;
  return false;
}

/// L2 projection of g onto the boundary trace space.
inline std::vector<double> project_boundary(const TensorSpace& space, const PatchMap& geom,
                                            const ScalarField& g,
                                            const std::vector<int>& boundary) {
  const int dim = space.dim;
  const int p = space.degree();
  const int nd = space.dofs_per_dim;
  const int nel = space.elements_per_dim();
  const int nb = static_cast<int>(boundary.size());
  std::vector<int> bindex(space.num_dofs, -1);
  for (int k = 0; k < nb; ++k) bindex[boundary[k]] = k;

  const GaussRule rule = gauss_rule(std::min(p + 2, 10));
  const int m = rule.points;
  SparseMatrix mass(nb);
  std::vector<double> rhs(nb, 0.0);
  std::vector<double> val(static_cast<std::size_t>(dim) * (p + 1)), der(val.size());

  const int fdim = dim - 1;
  for (int k = 0; k < dim; ++k) {
    for (int side = 0; side < 2; ++side) {
      std::array<int, 2> dirs{0, 0};  // in-face directions
      int t = 0;
      for (int d = 0; d < dim; ++d)
        if (d != k) dirs[t++] = d;
      long long face_elems = 1;
      for (int d = 0; d < fdim; ++d) face_elems *= nel;
      long long face_qpts = 1;
      for (int d = 0; d < fdim; ++d) face_qpts *= m;
      int nloc = 1;
      for (int d = 0; d < fdim; ++d) nloc *= p + 1;

      for (long long fe = 0; fe < face_elems; ++fe) {
        std::array<int, 2> elem{0, 0};
        long long rem = fe;
        for (int d = 0; d < fdim; ++d) {
          elem[d] = static_cast<int>(rem % nel);
          rem /= nel;
        }
        for (long long qk = 0; qk < face_qpts; ++qk) {
          std::array<int, 2> qi{0, 0};
          long long qrem = qk;
          for (int d = 0; d < fdim; ++d) {
            qi[d] = static_cast<int>(qrem % m);
            qrem /= m;
          }
          std::array<double, 3> xhat{0, 0, 0};
          xhat[k] = side ? 1.0 : 0.0;
          double w = 1.0;
          std::array<int, 2> first{0, 0};
          for (int d = 0; d < fdim; ++d) {
            const double x = (elem[d] + rule.nodes[qi[d]]) * space.kv.spacing;
            xhat[dirs[d]] = x;
            w *= rule.weights[qi[d]] * space.kv.spacing;
            std::span<double> v(val.data() + d * (p + 1), p + 1);
            std::span<double> dv(der.data() + d * (p + 1), p + 1);
            first[d] = eval_basis(space.kv, x, v, dv);
          }
          Vec3 phi;
          Mat3 J;
          eval_patch(geom, std::span<const double>(xhat.data(), dim), phi, J);
          // Surface measure from the Gram determinant of the tangent columns.
          double gram[4] = {0, 0, 0, 0};
          for (int a = 0; a < fdim; ++a)
            for (int bcol = 0; bcol < fdim; ++bcol) {
              double s = 0.0;
              for (int c = 0; c < dim; ++c)
                s += J[c * 3 + dirs[a]] * J[c * 3 + dirs[bcol]];
              gram[a * 2 + bcol] = s;
            }
          const double detg =
              (fdim == 1) ? gram[0] : gram[0] * gram[3] - gram[1] * gram[2];
          const double ds = std::sqrt(detg) * w;
          const double gv = g(phi);

          for (int a = 0; a < nloc; ++a) {
            int ra = a;
            double na = 1.0;
            std::array<int, 3> multi{0, 0, 0};
            multi[k] = side ? nd - 1 : 0;
            for (int d = 0; d < fdim; ++d) {
              const int ad = ra % (p + 1);
              ra /= p + 1;
              na *= val[d * (p + 1) + ad];
              multi[dirs[d]] = first[d] + ad;
            }
            const int ga = bindex[space.dof_flat(std::span<const int>(multi.data(), dim))];
            rhs[ga] += ds * gv * na;
            for (int bfun = 0; bfun < nloc; ++bfun) {
              int rb = bfun;
              double nb_val = 1.0;
              std::array<int, 3> multib{0, 0, 0};
              multib[k] = side ? nd - 1 : 0;
              for (int d = 0; d < fdim; ++d) {
                const int bd = rb % (p + 1);
                rb /= p + 1;
                nb_val *= val[d * (p + 1) + bd];
                multib[dirs[d]] = first[d] + bd;
              }
              const int gb = bindex[space.dof_flat(std::span<const int>(multib.data(), dim))];
              mass.add(ga, gb, ds * na * nb_val);
            }
          }
        }
      }
    }
  }
  mass.finalize();
  double rhs_norm = 0.0;
  for (double v : rhs) rhs_norm += v * v;
  if (rhs_norm == 0.0) return std::vector<double>(nb, 0.0);
  // The trace mass matrix is well conditioned; a tight tolerance keeps the
  // projected coefficients accurate to ~1e-13.
  CgResult sol = cg_solve(mass, rhs, 1e-14, 10LL * nb);
  return sol.x;
}

}  // namespace detail

inline DirichletSystem apply_dirichlet(const SparseMatrix& A, std::span<const double> b,
                                       const ScalarField& g, const TensorSpace& space,
                                       const PatchMap& geom) {
  if (A.size() != static_cast<int>(space.num_dofs) ||
      b.size() != static_cast<std::size_t>(space.num_dofs))
    throw std::invalid_argument("apply_dirichlet: size mismatch");
  DirichletSystem sys;
  for (long long i = 0; i < space.num_dofs; ++i)
    (detail::is_boundary_dof(space, i) ? sys.boundary : sys.interior)
        .push_back(static_cast<int>(i));
  sys.boundary_values = detail::project_boundary(space, geom, g, sys.boundary);

  std::vector<int> interior_index(space.num_dofs, -1);
  for (std::size_t k = 0; k < sys.interior.size(); ++k) interior_index[sys.interior[k]] = k;
  std::vector<double> full_boundary(space.num_dofs, 0.0);
  for (std::size_t k = 0; k < sys.boundary.size(); ++k)
    full_boundary[sys.boundary[k]] = sys.boundary_values[k];

  const int ni = static_cast<int>(sys.interior.size());
  std::vector<long long> row_ptr(ni + 1, 0);
  for (int r = 0; r < ni; ++r) {
    int count = 0;
    for (int j : A.row_cols(sys.interior[r]))
      if (interior_index[j] >= 0) ++count;
    row_ptr[r + 1] = row_ptr[r] + count;
  }
  std::vector<int> cols(row_ptr[ni]);
  std::vector<double> values(row_ptr[ni]);
  sys.rhs.resize(ni);
  long long k = 0;
  for (int r = 0; r < ni; ++r) {
    const int i = sys.interior[r];
    double shift = 0.0;
    const auto rc = A.row_cols(i);
    const auto rv = A.row_values(i);
    for (std::size_t e = 0; e < rc.size(); ++e) {
      const int j = rc[e];
      if (interior_index[j] >= 0) {
        cols[k] = interior_index[j];
        values[k] = rv[e];
        ++k;
      } else {
        shift += rv[e] * full_boundary[j];
      }
    }
    sys.rhs[r] = b[i] - shift;
  }
  sys.reduced = SparseMatrix::from_csr(ni, std::move(row_ptr), std::move(cols),
                                       std::move(values));
  return sys;
}

/// Full coefficient vector of a discrete solution.
struct DiscreteSolution {
  std::vector<double> coefficients;
};

struct SolveInfo {
  DiscreteSolution solution;
  int iterations = 0;
  double relative_residual = 0.0;
};

inline SolveInfo solve_reduced(const DirichletSystem& sys, const TensorSpace& space,
                               double tol) {
  CgResult cg = cg_solve(sys.reduced, sys.rhs, tol);
  SolveInfo info;
  info.iterations = cg.iterations;
  info.relative_residual = cg.relative_residual;
  info.solution.coefficients.assign(space.num_dofs, 0.0);
  for (std::size_t k = 0; k < sys.interior.size(); ++k)
    info.solution.coefficients[sys.interior[k]] = cg.x[k];
  for (std::size_t k = 0; k < sys.boundary.size(); ++k)
    info.solution.coefficients[sys.boundary[k]] = sys.boundary_values[k];
  return info;
}

struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Relative L2 and full H1 errors of a discrete solution against the
/// manufactured case, integrated with the given rule over the physical domain.
inline ErrorPair compute_errors(const TensorSpace& space, const PatchMap& geom,
                                const DiscreteSolution& sol, const ManufacturedCase& mc,
                                const GaussRule& rule, int threads = 1) {
  const int dim = space.dim;
  const int p = space.degree();
  const int nel = space.elements_per_dim();
  const int m = rule.points;
  int chunks = threads <= 1 ? 1 : std::min(threads, nel);
  std::vector<std::array<double, 4>> partial(chunks, {0.0, 0.0, 0.0, 0.0});

  detail::run_row_chunks(nel, chunks, [&](int c0, int c1, int tid) {
    std::vector<double> val(static_cast<std::size_t>(dim) * m * (p + 1));
    std::vector<double> der(val.size());
    auto val_at = [&](int d, int g) { return val.data() + ((d * m) + g) * (p + 1); };
    auto der_at = [&](int d, int g) { return der.data() + ((d * m) + g) * (p + 1); };
    int nloc = 1, nq = 1;
    for (int d = 0; d < dim; ++d) {
      nloc *= p + 1;
      nq *= m;
    }
    std::vector<long long> offsets(nloc);
    for (int a = 0; a < nloc; ++a) {
      int rem = a;
      long long off = 0, stride = 1;
      for (int d = 0; d < dim; ++d) {
        off += static_cast<long long>(rem % (p + 1)) * stride;
        rem /= p + 1;
        stride *= space.dofs_per_dim;
      }
      offsets[a] = off;
    }
    const double h = space.kv.spacing;
    double hn = 1.0;
    for (int d = 0; d < dim; ++d) hn *= h;
    double l2num = 0.0, l2den = 0.0, h1num = 0.0, h1den = 0.0;
    std::array<int, 3> elem{0, 0, 0};
    long long rest_total = 1;
    for (int d = 1; d < dim; ++d) rest_total *= nel;
    for (int c = c0; c < c1; ++c) {
      elem[0] = c;
      for (long long r = 0; r < rest_total; ++r) {
        long long rem = r;
        for (int d = 1; d < dim; ++d) {
          elem[d] = static_cast<int>(rem % nel);
          rem /= nel;
        }
        for (int d = 0; d < dim; ++d)
          for (int g = 0; g < m; ++g) {
            std::span<double> v(val_at(d, g), p + 1);
            std::span<double> dv(der_at(d, g), p + 1);
            eval_basis(space.kv, (elem[d] + rule.nodes[g]) * h, v, dv);
          }
        long long base = 0;
        for (int d = dim - 1; d >= 0; --d) base = base * space.dofs_per_dim + elem[d];
        std::array<int, 3> q{0, 0, 0};
        std::array<double, 3> xhat{0, 0, 0};
        Vec3 phi;
        Mat3 J;
        for (int kq = 0; kq < nq; ++kq) {
          double w = hn;
          for (int d = 0; d < dim; ++d) {
            xhat[d] = (elem[d] + rule.nodes[q[d]]) * h;
            w *= rule.weights[q[d]];
          }
          detail::eval_patch(geom, std::span<const double>(xhat.data(), dim), phi, J);
          const double det = detail::det_dim(J, dim);
          const double adet = std::abs(det);
          double uh = 0.0;
          std::array<double, 3> gh{0, 0, 0};
          for (int a = 0; a < nloc; ++a) {
            int ra = a;
            double shape = 1.0;
            std::array<double, 3> grad{1.0, 1.0, 1.0};
            for (int d = 0; d < dim; ++d) {
              const int ad = ra % (p + 1);
              ra /= p + 1;
              const double vd = val_at(d, q[d])[ad];
              const double dd = der_at(d, q[d])[ad];
              shape *= vd;
              for (int cdir = 0; cdir < dim; ++cdir)
                grad[cdir] *= (cdir == d) ? dd : vd;
            }
            const double coef = sol.coefficients[base + offsets[a]];
            uh += coef * shape;
            for (int cdir = 0; cdir < dim; ++cdir) gh[cdir] += coef * grad[cdir];
          }
          // Physical gradient: Dphi^{-T} * reference gradient.
          const Mat3 adj = detail::adjugate_dim(J, dim);
          Vec3 gphys{0, 0, 0};
          for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += adj[j * 3 + i] * gh[j];
            gphys[i] = s / det;
          }
          const double ue = mc.u(phi);
          const Vec3 ge = mc.grad_u(phi);
          const double du = uh - ue;
          double dg2 = 0.0, ge2 = 0.0;
          for (int d = 0; d < dim; ++d) {
            dg2 += (gphys[d] - ge[d]) * (gphys[d] - ge[d]);
            ge2 += ge[d] * ge[d];
          }
          l2num += w * adet * du * du;
          l2den += w * adet * ue * ue;
          h1num += w * adet * (du * du + dg2);
          h1den += w * adet * (ue * ue + ge2);
          for (int d = 0; d < dim; ++d) {
            if (++q[d] < m) break;
            q[d] = 0;
          }
        }
      }
    }
    partial[tid] = {l2num, l2den, h1num, h1den};
  });
  std::array<double, 4> total{0, 0, 0, 0};
  for (const auto& pr : partial)
    for (int i = 0; i < 4; ++i) total[i] += pr[i];
  ErrorPair e;
  e.l2 = std::sqrt(total[0] / total[1]);
  e.h1 = std::sqrt(total[2] / total[3]);
  return e;
}

}  // namespace iga
