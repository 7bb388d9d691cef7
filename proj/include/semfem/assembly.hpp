#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "semfem/femspace.hpp"
#include "semfem/mesh.hpp"
#include "semfem/quadrature.hpp"
#include "semfem/sparse.hpp"

namespace semfem {

namespace detail {

inline double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

inline void check_area(double area, Vec2 a, Vec2 b, Vec2 c) {
  double scale = std::max({(b - a).dot(b - a), (c - b).dot(c - b), (a - c).dot(a - c)});
  if (!(std::abs(area) > 1e-14 * scale)) throw SolverError("assembly: degenerate element");
}

// Gradients of the three barycentric coordinates.
inline std::array<Vec2, 3> p1_gradients(Vec2 a, Vec2 b, Vec2 c, double area) {
  auto rot = [](Vec2 v) { return Vec2{-v.y, v.x}; };
  double s = 1.0 / (2.0 * area);
  return {rot(c - b) * s, rot(a - c) * s, rot(b - a) * s};
}

}  // namespace detail

using Local3 = std::array<std::array<double, 3>, 3>;

inline Local3 local_stiffness(Vec2 a, Vec2 b, Vec2 c) {
  double area = detail::signed_area(a, b, c);
  detail::check_area(area, a, b, c);
  auto g = detail::p1_gradients(a, b, c, area);
  Local3 k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = std::abs(area) * g[i].dot(g[j]);
  return k;
}

inline Local3 local_mass(Vec2 a, Vec2 b, Vec2 c) {
  double area = detail::signed_area(a, b, c);
  detail::check_area(area, a, b, c);
  double s = std::abs(area) / 12.0;
  return {{{2 * s, s, s}, {s, 2 * s, s}, {s, s, 2 * s}}};
}

namespace detail {

template <class LocalFn>
SparseSymMatrix assemble_matrix(const Mesh& m, const DofMap& dm, LocalFn&& local) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<std::size_t>(m.tri_count()) * 9);
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    auto loc = local(e);
    for (int i = 0; i < 3; ++i) {
      int di = dm.vertex_to_dof[t[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        int dj = dm.vertex_to_dof[t[j]];
        if (dj >= 0) ts.push_back({di, dj, loc[i][j]});
      }
    }
  }
  return SparseSymMatrix::from_triplets(dm.n_free, std::move(ts));
}

}  // namespace detail

inline SparseSymMatrix assemble_stiffness(const Mesh& m, const DofMap& dm) {
  return detail::assemble_matrix(m, dm, [&](int e) {
    const auto& t = m.tris[e];
    return local_stiffness(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  });
}

inline SparseSymMatrix assemble_mass(const Mesh& m, const DofMap& dm) {
  return detail::assemble_matrix(m, dm, [&](int e) {
    const auto& t = m.tris[e];
    return local_mass(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  });
}

// Entries int_Omega w(x) phi_i phi_j by quadrature; same sparsity pattern as
// assemble_mass, so the results can be combined entry-wise.
inline SparseSymMatrix assemble_weighted_mass(const Mesh& m, const DofMap& dm,
                                              const std::function<double(Vec2)>& w,
                                              const QuadratureRule& q) {
  return detail::assemble_matrix(m, dm, [&](int e) {
    const auto& t = m.tris[e];
    Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    double area = detail::signed_area(a, b, c);
    detail::check_area(area, a, b, c);
    Local3 loc{};
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 p = l0 * a + qp.l1 * b + qp.l2 * c;
      double f = std::abs(area) * qp.w * w(p);
      double bary[3] = {l0, qp.l1, qp.l2};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) loc[i][j] += f * bary[i] * bary[j];
    }
    return loc;
  });
}

// B_lambda(u, v) = lambda (grad u, grad v) + (u, v), as a matrix sharing the
// layout of A and M so quadratic forms on it are entry-wise combinations.
inline SparseSymMatrix b_lambda(const SparseSymMatrix& A, const SparseSymMatrix& M,
                                double lambda) {
  return A.combined(lambda, M, 1.0);
}

// ||v||_lambda = sqrt(lambda ||grad v||^2 + ||v||^2), evaluated through the
// same entry-wise combined matrix as b_lambda so the two agree exactly.
inline double norm_lambda(const std::vector<double>& v, const SparseSymMatrix& A,
                          const SparseSymMatrix& M, double lambda) {
  return std::sqrt(b_lambda(A, M, lambda).quadratic_form(v));
}

// Load vector b_i = int_Omega g(x) phi_i for the free basis functions.
inline std::vector<double> assemble_load(const Mesh& m, const DofMap& dm,
                                         const std::function<double(Vec2)>& g,
                                         const QuadratureRule& q) {
  std::vector<double> b(dm.n_free, 0.0);
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    Vec2 a = m.vertices[t[0]], vb = m.vertices[t[1]], c = m.vertices[t[2]];
    double area = std::abs(detail::signed_area(a, vb, c));
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 p = l0 * a + qp.l1 * vb + qp.l2 * c;
      double f = area * qp.w * g(p);
      double bary[3] = {l0, qp.l1, qp.l2};
      for (int i = 0; i < 3; ++i) {
        int di = dm.vertex_to_dof[t[i]];
        if (di >= 0) b[di] += f * bary[i];
      }
    }
  }
  return b;
}

// Load vector b_i = int_Omega g(x, u(x)) phi_i with u the current P1 iterate.
inline std::vector<double> assemble_weighted_load(const Mesh& m, const DofMap& dm,
                                                  const std::function<double(Vec2, double)>& g,
                                                  const FeFunction& u, const QuadratureRule& q) {
  std::vector<double> vals = vertex_values(m, dm, u);
  std::vector<double> b(dm.n_free, 0.0);
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    Vec2 a = m.vertices[t[0]], vb = m.vertices[t[1]], c = m.vertices[t[2]];
    double area = std::abs(detail::signed_area(a, vb, c));
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 p = l0 * a + qp.l1 * vb + qp.l2 * c;
      double uq = l0 * vals[t[0]] + qp.l1 * vals[t[1]] + qp.l2 * vals[t[2]];
      double f = area * qp.w * g(p, uq);
      double bary[3] = {l0, qp.l1, qp.l2};
      for (int i = 0; i < 3; ++i) {
        int di = dm.vertex_to_dof[t[i]];
        if (di >= 0) b[di] += f * bary[i];
      }
    }
  }
  return b;
}

}  // namespace semfem
