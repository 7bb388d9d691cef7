#pragma once

#include <cmath>
#include <vector>

#include "semfem/assembly.hpp"
#include "semfem/problem.hpp"

namespace semfem {

// E(u) = 1/2 ||grad u||^2 - int F(x, u). The gradient term is exact for P1
// (stiffness quadratic form), the F term uses the given rule.
inline double energy(const Problem& p, const Mesh& m, const DofMap& dm, const FeFunction& u,
                     const SparseSymMatrix& A, const QuadratureRule& q) {
  double e = 0.5 * A.quadratic_form(u.coeff);
  std::vector<double> vals = vertex_values(m, dm, u);
  for (int el = 0; el < m.tri_count(); ++el) {
    const auto& t = m.tris[el];
    Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    double area = m.tri_area(el);
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 x = l0 * a + qp.l1 * b + qp.l2 * c;
      double uq = l0 * vals[t[0]] + qp.l1 * vals[t[1]] + qp.l2 * vals[t[2]];
      e -= area * qp.w * p.F(x, uq);
    }
  }
  if (!std::isfinite(e)) throw SolverError("energy: non-finite value");
  return e;
}

// <E'(u), phi_i> for every free hat: A c - (f(x,u), phi_i).
inline std::vector<double> energy_derivative_pairing(const Problem& p, const Mesh& m,
                                                     const DofMap& dm, const FeFunction& u,
                                                     const SparseSymMatrix& A,
                                                     const QuadratureRule& q) {
  std::vector<double> r = A.apply(u.coeff);
  std::vector<double> lf = assemble_weighted_load(m, dm, p.f, u, q);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lf[i];
  return r;
}

}  // namespace semfem
