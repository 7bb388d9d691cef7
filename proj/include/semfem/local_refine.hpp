#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "semfem/energy.hpp"
#include "semfem/iterate.hpp"
#include "semfem/patch.hpp"
#include "semfem/problem.hpp"

namespace semfem {

// Quantities shared by every local solve of one sweep. All of them refer to
// the same global iterate u; the sweep never updates u, so the local solves
// are order-independent.
struct SweepShared {
  double b_uu = 0.0;      // B(u,u)
  double l_uu = 0.0;      // ell(u; u) = (u,u) + dt (f(.,u), u)
  double m_uu = 0.0;      // ||u||_L2^2
  double stiff_uu = 0.0;  // ||grad u||^2
  double energy_u = 0.0;  // E(u)
};

inline SweepShared compute_sweep_shared(const Problem& p, const Mesh& m, const DofMap& dm,
                                        const SpaceOperators& ops, const FeFunction& u,
                                        const QuadratureRule& q) {
  SweepShared s;
  s.stiff_uu = ops.A.quadratic_form(u.coeff);
  s.m_uu = ops.M.quadratic_form(u.coeff);
  s.b_uu = ops.dt * s.stiff_uu + s.m_uu;
  std::vector<double> lf = assemble_weighted_load(m, dm, p.f, u, q);
  double clf = 0.0;
  for (std::size_t i = 0; i < lf.size(); ++i) clf += u.coeff[i] * lf[i];
  s.l_uu = s.m_uu + ops.dt * clf;
  s.energy_u = energy(p, m, dm, u, ops.A, q);
  return s;
}

struct LocalSolveResult {
  int element = -1;
  int m = 0;                      // number of midpoint hats
  double alpha = 1.0;             // coefficient of u in the local minimiser
  std::array<double, 3> eta{};    // hat coefficients (first m entries)
  std::array<int, 3> eta_edge{};  // local edges the hats sit on
  double decay_approx = 0.0;      // (1/dt) ||w||_dt^2, clamped at 0
  double decay_exact = std::numeric_limits<double>::quiet_NaN();
  double w_dt_sq = 0.0;           // ||w||_dt^2 (unclamped)
  double w_l2_sq = 0.0;           // ||w||_L2^2
  bool dropped_u = false;         // u direction was degenerate on this patch
};

namespace detail {

// Dense symmetric-positive Cholesky for the tiny local Gram systems,
// factoring the hat block first so a degenerate trailing u-row can be
// dropped cleanly. Returns false when the last pivot is unusable.
inline bool cholesky_solve_drop_last(std::vector<double>& G, std::vector<double>& rhs, int n) {
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(G[i * n + i]));
  bool full = true;
  int rank = n;
  for (int k = 0; k < n; ++k) {
    double d = G[k * n + k];
    for (int j = 0; j < k; ++j) d -= G[k * n + j] * G[k * n + j];
    if (d <= 1e-13 * scale) {
      if (k == n - 1) {
        full = false;
        rank = n - 1;
        break;
      }
      throw SolverError("local_step: singular hat block");
    }
    d = std::sqrt(d);
    G[k * n + k] = d;
    for (int i = k + 1; i < n; ++i) {
      double v = G[i * n + k];
      for (int j = 0; j < k; ++j) v -= G[i * n + j] * G[k * n + j];
      G[i * n + k] = v / d;
    }
  }
  // forward/back substitution on the leading rank x rank block
  for (int i = 0; i < rank; ++i) {
    double v = rhs[i];
    for (int j = 0; j < i; ++j) v -= G[i * n + j] * rhs[j];
    rhs[i] = v / G[i * n + i];
  }
  for (int i = rank - 1; i >= 0; --i) {
    double v = rhs[i];
    for (int j = i + 1; j < rank; ++j) v -= G[j * n + i] * rhs[j];
    rhs[i] = v / G[i * n + i];
  }
  return full;
}

}  // namespace detail

// Solve the iteration weak form on the local space span{hats, u} of one
// element's patch: B(u~, v) = ell(u; v) for all v in the local space. The
// candidate w = u~ - u prices the patch refinement by the energy the
// iteration itself would gain, (1/dt)||w||_dt^2, with no residual estimator.
inline LocalSolveResult local_step(const Problem& p, const Mesh& m, const DofMap& dm,
                                   const SpaceOperators& ops, const FeFunction& u, int element,
                                   const SweepShared& shared, const QuadratureRule& q,
                                   bool want_exact = false) {
  PatchSubdivision patch = build_patch_subdivision(m, dm, u, element);
  const int nv = patch.n_verts();
  const int nh = patch.n_hats();
  const double dt = ops.dt;

  // dense patch assembly: stiffness, mass, and the f-weighted load
  std::vector<double> K(nv * nv, 0.0), M(nv * nv, 0.0), fload(nv, 0.0);
  for (const auto& st : patch.tris) {
    Vec2 a = patch.verts[st[0]], b = patch.verts[st[1]], c = patch.verts[st[2]];
    Local3 lk = local_stiffness(a, b, c);
    Local3 lm = local_mass(a, b, c);
    double area = 0.5 * cross(b - a, c - a);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        K[st[i] * nv + st[j]] += lk[i][j];
        M[st[i] * nv + st[j]] += lm[i][j];
      }
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 x = l0 * a + qp.l1 * b + qp.l2 * c;
      double uq = l0 * patch.u_vals[st[0]] + qp.l1 * patch.u_vals[st[1]] +
                  qp.l2 * patch.u_vals[st[2]];
      double f = area * qp.w * p.f(x, uq);
      double bary[3] = {l0, qp.l1, qp.l2};
      for (int i = 0; i < 3; ++i) fload[st[i]] += f * bary[i];
    }
  }
  auto row_dot_u = [&](const std::vector<double>& mat, int v) {
    double s = 0.0;
    for (int j = 0; j < nv; ++j) s += mat[v * nv + j] * patch.u_vals[j];
    return s;
  };

  // Gram system over {eta_1..eta_nh, u}
  const int n = nh + 1;
  std::vector<double> G(n * n, 0.0), rhs(n, 0.0);
  std::array<double, 3> bu{}, ku{}, mu{};
  for (int i = 0; i < nh; ++i) {
    int hi = patch.hat_vertex[i];
    for (int j = 0; j < nh; ++j) {
      int hj = patch.hat_vertex[j];
      G[i * n + j] = dt * K[hi * nv + hj] + M[hi * nv + hj];
    }
    ku[i] = row_dot_u(K, hi);
    mu[i] = row_dot_u(M, hi);
    bu[i] = dt * ku[i] + mu[i];
    G[i * n + nh] = G[nh * n + i] = bu[i];
    rhs[i] = mu[i] + dt * fload[hi];
  }
  G[nh * n + nh] = shared.b_uu;
  rhs[nh] = shared.l_uu;

  LocalSolveResult res;
  res.element = element;
  res.m = nh;
  for (int i = 0; i < nh; ++i) res.eta_edge[i] = patch.hat_edge[i];

  std::vector<double> sol = rhs;
  bool full = detail::cholesky_solve_drop_last(G, sol, n);
  if (!full) {
    // u is (numerically) zero on this patch and globally: fix alpha = 1 and
    // solve the hat block against ell(u; eta) - B(u, eta)
    res.dropped_u = true;
    std::vector<double> Gh((nh) * (nh), 0.0), rh(nh, 0.0);
    for (int i = 0; i < nh; ++i) {
      int hi = patch.hat_vertex[i];
      for (int j = 0; j < nh; ++j) {
        int hj = patch.hat_vertex[j];
        Gh[i * nh + j] = dt * K[hi * nv + hj] + M[hi * nv + hj];
      }
      rh[i] = mu[i] + dt * fload[hi] - bu[i];
    }
    if (nh > 0) detail::cholesky_solve_drop_last(Gh, rh, nh);
    res.alpha = 1.0;
    for (int i = 0; i < nh; ++i) res.eta[i] = rh[i];
  } else {
    res.alpha = sol[nh];
    for (int i = 0; i < nh; ++i) res.eta[i] = sol[i];
  }

  // w = (alpha - 1) u + sum_i eta_i hat_i
  const double am1 = res.alpha - 1.0;
  double hh_b = 0.0, hh_m = 0.0, hh_k = 0.0, hu_b = 0.0, hu_m = 0.0, hu_k = 0.0;
  for (int i = 0; i < nh; ++i) {
    int hi = patch.hat_vertex[i];
    for (int j = 0; j < nh; ++j) {
      int hj = patch.hat_vertex[j];
      double kk = K[hi * nv + hj], mm = M[hi * nv + hj];
      hh_k += res.eta[i] * res.eta[j] * kk;
      hh_m += res.eta[i] * res.eta[j] * mm;
      hh_b += res.eta[i] * res.eta[j] * (dt * kk + mm);
    }
    hu_k += res.eta[i] * ku[i];
    hu_m += res.eta[i] * mu[i];
    hu_b += res.eta[i] * bu[i];
  }
  res.w_dt_sq = am1 * am1 * shared.b_uu + hh_b + 2.0 * am1 * hu_b;
  res.w_l2_sq = am1 * am1 * shared.m_uu + hh_m + 2.0 * am1 * hu_m;
  res.decay_approx = std::max(res.w_dt_sq / dt, 0.0);

  if (want_exact) {
    // E(u) - E(u+w) = int [F(u+w) - F(u)] - A(u,w) - 1/2 A(w,w)
    double a_uw = am1 * shared.stiff_uu + hu_k;
    double a_ww = am1 * am1 * shared.stiff_uu + hh_k + 2.0 * am1 * hu_k;
    double fdiff = 0.0;
    for (const auto& st : patch.tris) {
      Vec2 a = patch.verts[st[0]], b = patch.verts[st[1]], c = patch.verts[st[2]];
      double area = 0.5 * cross(b - a, c - a);
      for (const auto& qp : q.points) {
        double l0 = 1.0 - qp.l1 - qp.l2;
        Vec2 x = l0 * a + qp.l1 * b + qp.l2 * c;
        double bary[3] = {l0, qp.l1, qp.l2};
        double uq = 0.0, wq = 0.0;
        for (int i = 0; i < 3; ++i) {
          uq += bary[i] * patch.u_vals[st[i]];
          for (int h = 0; h < nh; ++h)
            if (st[i] == patch.hat_vertex[h]) wq += bary[i] * res.eta[h];
        }
        wq += am1 * uq;
        fdiff += area * qp.w * (p.F(x, uq + wq) - p.F(x, uq));
      }
    }
    if (am1 != 0.0) {
      // outside the patch w = (alpha-1) u; one global pass
      std::vector<double> vals = vertex_values(m, dm, u);
      for (int e = 0; e < m.tri_count(); ++e) {
        bool member = false;
        for (int g : patch.members) member = member || g == e;
        if (member) continue;
        const auto& t = m.tris[e];
        Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
        double area = m.tri_area(e);
        for (const auto& qp : q.points) {
          double l0 = 1.0 - qp.l1 - qp.l2;
          Vec2 x = l0 * a + qp.l1 * b + qp.l2 * c;
          double uq = l0 * vals[t[0]] + qp.l1 * vals[t[1]] + qp.l2 * vals[t[2]];
          fdiff += area * qp.w * (p.F(x, res.alpha * uq) - p.F(x, uq));
        }
      }
    }
    res.decay_exact = fdiff - a_uw - 0.5 * a_ww;
  }
  return res;
}

// Local decays for every element against the same iterate (one sweep).
inline std::vector<LocalSolveResult> local_sweep(const Problem& p, const Mesh& m,
                                                 const DofMap& dm, const SpaceOperators& ops,
                                                 const FeFunction& u, const QuadratureRule& q,
                                                 bool want_exact = false) {
  SweepShared shared = compute_sweep_shared(p, m, dm, ops, u, q);
  std::vector<LocalSolveResult> out;
  out.reserve(m.tri_count());
  for (int e = 0; e < m.tri_count(); ++e)
    out.push_back(local_step(p, m, dm, ops, u, e, shared, q, want_exact));
  return out;
}

inline double local_decay_approx(const LocalSolveResult& r) { return r.decay_approx; }
inline double local_decay_exact(const LocalSolveResult& r) { return r.decay_exact; }

}  // namespace semfem
