#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "semfem/energy.hpp"
#include "semfem/iterate.hpp"
#include "semfem/local_refine.hpp"
#include "semfem/marking.hpp"
#include "semfem/problem.hpp"

namespace semfem {

enum class DecayMode { approximate, exact };

struct AdaptiveParams {
  double alpha = 0.5;
  double theta = 0.5;
  double dt = 0.0;        // 0: problem default
  double max_dof = 0.0;   // 0: problem default
  int initial_n = 0;      // 0: problem default
  int quad_order = 4;
  DecayMode decay = DecayMode::approximate;
  int max_inner = 100;
  double cg_tol = 1e-12;
  bool direct = false;    // one-shot linear solve instead of the iteration
  bool timing = false;    // real wall times in the records
};

struct RunRecord {
  int level = 0;
  int dof = 0;
  int nstar = 1;
  double energy = 0.0;
  double residual = 0.0;
  double error_h1 = std::numeric_limits<double>::quiet_NaN();
  double q = std::numeric_limits<double>::quiet_NaN();
  double walltime_s = 0.0;
  bool hit_max_inner = false;
  bool direct = false;
};

struct AdaptiveResult {
  std::vector<RunRecord> records;
  Mesh mesh;
  DofMap dofmap;
  FeFunction u;
  bool converged = false;  // sweep found no decay anywhere
};

// Called once per completed level; inner gives the iteration trace (null on
// the direct path).
using LevelCallback = std::function<void(const RunRecord&, const Mesh&, const DofMap&,
                                         const FeFunction&, const IterationResult* inner)>;

// H1-seminorm error against a known gradient, by order-6 quadrature.
inline double h1_error(const Problem& p, const Mesh& m, const DofMap& dm, const FeFunction& u) {
  if (!p.exact_gradient) return std::numeric_limits<double>::quiet_NaN();
  const QuadratureRule& q = triangle_quadrature(6);
  std::vector<double> vals = vertex_values(m, dm, u);
  double err = 0.0;
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    double area = m.tri_area(e);
    auto g = detail::p1_gradients(a, b, c, area);
    Vec2 gh = g[0] * vals[t[0]] + g[1] * vals[t[1]] + g[2] * vals[t[2]];
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 x = l0 * a + qp.l1 * b + qp.l2 * c;
      Vec2 d = p.exact_gradient(x) - gh;
      err += area * qp.w * d.dot(d);
    }
  }
  return std::sqrt(err);
}

// Energy contraction factors Q_N = (E_{N+1} - ref)/(E_N - ref), attached to
// the row of level N+1. Undefined entries stay NaN.
inline std::vector<double> q_factors(const std::vector<double>& energies, double e_ref) {
  std::vector<double> q(energies.size(), std::numeric_limits<double>::quiet_NaN());
  if (!std::isfinite(e_ref)) return q;
  for (std::size_t i = 1; i < energies.size(); ++i) {
    double denom = energies[i - 1] - e_ref;
    if (std::abs(denom) < 1e-13 * (1.0 + std::abs(e_ref))) continue;
    q[i] = (energies[i] - e_ref) / denom;
  }
  return q;
}

// Energy-driven adaptive loop: solve on the current space, price every
// element by its local-solve decay, Dorfler-mark, split all edges of the
// marked elements, carry the iterate over, repeat. Stops once refinement
// would push the dof count past max_dof (that space is never solved), or
// when no element offers any decay.
inline AdaptiveResult adaptive_solve(const Problem& p, const AdaptiveParams& prm,
                                     double e_ref = std::numeric_limits<double>::quiet_NaN(),
                                     const LevelCallback& callback = nullptr) {
  const double dt = prm.dt > 0.0 ? prm.dt : p.dt_default;
  const double max_dof = prm.max_dof > 0.0 ? prm.max_dof : p.max_dof_default;
  const int initial_n = prm.initial_n > 0 ? prm.initial_n : p.initial_n_default;
  const QuadratureRule& quad = triangle_quadrature(prm.quad_order);
  if (!(dt > 0.0)) throw ConfigError("adaptive_solve: dt must be positive");

  AdaptiveResult out;
  out.mesh = initial_mesh(p.domain, initial_n);
  out.dofmap = DofMap::build(out.mesh);
  out.u = FeFunction::zero(out.dofmap, 0, p.dirichlet_lift);

  IterateOptions iopt;
  iopt.alpha = prm.alpha;
  iopt.max_inner = prm.max_inner;
  iopt.cg_tol = prm.cg_tol;

  bool have_base = false;
  for (int level = 0;; ++level) {
    auto t0 = std::chrono::steady_clock::now();
    SpaceOperators ops = SpaceOperators::assemble(out.mesh, out.dofmap, dt);
    if (!have_base) {
      // stopping baseline: energy of the very first iterate of the run
      iopt.phi_base = energy(p, out.mesh, out.dofmap, out.u, ops.A, quad);
      have_base = true;
    }

    RunRecord rec;
    rec.level = level;
    rec.dof = out.dofmap.n_free;
    rec.direct = prm.direct;
    IterationResult inner;
    if (prm.direct) {
      out.u = solve_linear_direct(p, out.mesh, out.dofmap, quad, prm.cg_tol, &out.u);
      rec.energy = energy(p, out.mesh, out.dofmap, out.u, ops.A, quad);
      rec.residual = 0.0;
      rec.nstar = 1;
    } else {
      inner = iterate_on_space(p, out.mesh, out.dofmap, ops, std::move(out.u), quad, iopt);
      out.u = std::move(inner.u);
      rec.energy = inner.trace.back().energy;
      rec.residual = inner.trace.back().residual;
      rec.nstar = inner.nstar;
      rec.hit_max_inner = inner.hit_max_inner;
    }
    rec.error_h1 = h1_error(p, out.mesh, out.dofmap, out.u);

    bool last = rec.dof > max_dof;  // only an oversized initial space
    std::vector<int> marked;
    if (!last) {
      if (prm.decay == DecayMode::exact && out.mesh.tri_count() >= 5000)
        throw SolverError(
            "adaptive_solve: exact decay sweeps cost O(elements^2); "
            "use max_dof small enough to stay under 5000 elements");
      std::vector<LocalSolveResult> locals = local_sweep(
          p, out.mesh, out.dofmap, ops, out.u, quad, prm.decay == DecayMode::exact);
      std::vector<double> decays(locals.size());
      for (std::size_t i = 0; i < locals.size(); ++i)
        decays[i] = prm.decay == DecayMode::exact ? locals[i].decay_exact
                                                  : locals[i].decay_approx;
      marked = dorfler_mark(decays, prm.theta);
      if (marked.empty()) {
        out.converged = true;
        last = true;
      }
    }
    if (prm.timing)
      rec.walltime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.records.push_back(rec);
    if (callback) callback(rec, out.mesh, out.dofmap, out.u, prm.direct ? nullptr : &inner);
    if (last) break;

    auto [refined, record] = bisect_full(out.mesh, marked);
    DofMap dm_new = DofMap::build(refined);
    // The space that crosses max_dof is never solved: recorded levels stay
    // within the budget (except an initial space that is already over it).
    if (dm_new.n_free > max_dof) break;
    out.u = prolongate(out.u, record, out.dofmap, refined, dm_new);
    out.mesh = std::move(refined);
    out.dofmap = std::move(dm_new);
  }

  std::vector<double> energies(out.records.size());
  for (std::size_t i = 0; i < out.records.size(); ++i) energies[i] = out.records[i].energy;
  std::vector<double> q = q_factors(energies, e_ref);
  for (std::size_t i = 0; i < out.records.size(); ++i) out.records[i].q = q[i];
  return out;
}

}  // namespace semfem
