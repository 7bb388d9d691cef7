#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>

#include "semfem/assembly.hpp"
#include "semfem/errors.hpp"
#include "semfem/geometry.hpp"
#include "semfem/mesh.hpp"
#include "semfem/sparse.hpp"
#include "semfem/special.hpp"

namespace semfem {

// f(x,u) = c0(x) + c1(x) u, for problems where the discrete system can be
// solved in one shot. coercive means c1 <= 0 (stiffness minus the c1 mass
// term stays SPD).
struct LinearStructure {
  std::function<double(Vec2)> c0, c1;
  bool coercive = true;
};

struct BoundValue {
  double value = 0.0;
  bool exact = false;  // false: sampled estimate
};

// Semilinear Dirichlet problem -laplace(u) = f(x,u), u = 0 on the boundary,
// with energy E(u) = 1/2 ||grad u||^2 - int F(x,u), F(x,0) = 0.
struct Problem {
  std::string name;
  DomainSpec domain;
  double epsilon = 0.0;  // 0 when the experiment has no parameter
  std::function<double(Vec2, double)> f;      // f(x, u)
  std::function<double(Vec2, double)> df_du;  // df/du(x, u)
  std::function<double(Vec2, double)> F;      // primitive of f in u
  double dirichlet_lift = 0.0;                // constant already subtracted from the unknown
  double dt_default = 0.5;
  int initial_n_default = 4;
  double max_dof_default = 1e5;
  std::function<double(Vec2)> exact_solution;  // empty when unknown
  std::function<Vec2(Vec2)> exact_gradient;
  BoundValue f_lipschitz;                      // sup |df/du|
  std::function<double(double)> sigma_closed;  // closed-form sigma_f(lambda), empty -> sampled
  std::optional<LinearStructure> linear;
  bool prefer_direct = false;
};

namespace detail {

// Arrhenius reaction term: phi(s) = (1-|s|) exp(-1/|s|), phi(0) = 0.
inline double arrhenius_phi(double s) {
  double v = std::abs(s);
  return v == 0.0 ? 0.0 : (1.0 - v) * std::exp(-1.0 / v);
}

inline double arrhenius_dphi(double s) {
  double v = std::abs(s);
  if (v == 0.0) return 0.0;
  double d = std::exp(-1.0 / v) * (-1.0 + (1.0 - v) / (v * v));
  return s > 0.0 ? d : -d;
}

// H(v) = int_0^v phi, v >= 0:  (3v/2 - v^2/2) e^(-1/v) - (3/2) E1(1/v).
inline double arrhenius_primitive(double v) {
  if (v == 0.0) return 0.0;
  return (1.5 * v - 0.5 * v * v) * std::exp(-1.0 / v) - 1.5 * expint_e1(1.0 / v);
}

inline double sample_sup_dphi() {
  double sup = 0.0;
  for (int i = 1; i <= 6000; ++i) sup = std::max(sup, std::abs(arrhenius_dphi(i * 0.01)));
  return sup;
}

}  // namespace detail

// The built-in experiments. epsilon = 0 picks the experiment's default; only
// sine_gordon_singular, lshape_exp and oscillation accept a user value.
inline Problem builtin(const std::string& id, double epsilon = 0.0) {
  const double pi = std::numbers::pi;
  auto need_eps = [&](double def) {
    if (epsilon == 0.0) return def;
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    return epsilon;
  };
  auto no_eps = [&] {
    if (epsilon != 0.0) throw ConfigError("experiment '" + id + "' does not take epsilon");
  };

  Problem p;
  p.name = id;
  if (id == "sine_gordon_manufactured") {
    no_eps();
    p.domain = DomainSpec::unit_square();
    auto s = [pi](Vec2 x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
    auto g = [s, pi](Vec2 x) {
      double v = s(x);
      return (1.0 + 2.0 * pi * pi) * v + std::sin(v);
    };
    p.f = [g](Vec2 x, double u) { return -std::sin(u) - u + g(x); };
    p.df_du = [](Vec2, double u) { return -std::cos(u) - 1.0; };
    p.F = [g](Vec2 x, double u) { return std::cos(u) - 1.0 - 0.5 * u * u + g(x) * u; };
    p.dt_default = 0.5;
    p.exact_solution = s;
    p.exact_gradient = [pi](Vec2 x) {
      return Vec2{pi * std::cos(pi * x.x) * std::sin(pi * x.y),
                  pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
    };
    p.f_lipschitz = {2.0, true};
    p.sigma_closed = [](double l) { return std::max(1.0 / l, std::abs(2.0 - 1.0 / l)); };
  } else if (id == "sine_gordon_singular") {
    double eps = need_eps(1e-3);
    p.domain = DomainSpec::unit_square();
    p.epsilon = eps;
    p.f = [eps](Vec2, double u) { return (-std::sin(u) - u + 1.0) / eps; };
    p.df_du = [eps](Vec2, double u) { return -(std::cos(u) + 1.0) / eps; };
    p.F = [eps](Vec2, double u) { return (std::cos(u) - 1.0 - 0.5 * u * u + u) / eps; };
    p.dt_default = 0.5 * eps;
    p.f_lipschitz = {2.0 / eps, true};
    p.sigma_closed = [eps](double l) {
      return std::max(1.0 / l, std::abs(2.0 / eps - 1.0 / l));
    };
  } else if (id == "lshape_exp") {
    double eps = need_eps(1e-2);
    p.domain = DomainSpec::lshape();
    p.epsilon = eps;
    p.f = [eps](Vec2, double u) { return std::exp(-u * u) / eps; };
    p.df_du = [eps](Vec2, double u) { return -2.0 * u * std::exp(-u * u) / eps; };
    p.F = [eps](Vec2, double u) { return 0.5 * std::sqrt(std::numbers::pi) * std::erf(u) / eps; };
    p.dt_default = eps;
    double cf = std::sqrt(2.0) * std::exp(-0.5) / eps;  // attained at u = 1/sqrt(2)
    p.f_lipschitz = {cf, true};
    p.sigma_closed = [cf](double l) { return cf + 1.0 / l; };
  } else if (id == "arrhenius") {
    no_eps();
    p.domain = DomainSpec::unit_square();
    p.dirichlet_lift = 2.0;  // solve for w = u - 2
    p.f = [](Vec2, double w) { return detail::arrhenius_phi(w + 2.0); };
    p.df_du = [](Vec2, double w) { return detail::arrhenius_dphi(w + 2.0); };
    const double h2 = detail::arrhenius_primitive(2.0);
    p.F = [h2](Vec2, double w) {
      double s = w + 2.0;
      double sgn = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
      return sgn * detail::arrhenius_primitive(std::abs(s)) - h2;
    };
    p.dt_default = 1.0;
    p.max_dof_default = 1e4;
    static const double sampled_cf = detail::sample_sup_dphi();
    p.f_lipschitz = {sampled_cf, false};
  } else if (id == "sign_discontinuity") {
    no_eps();
    double eps = 1e-8;  // fixed by the problem statement
    p.domain = DomainSpec::unit_square();
    p.epsilon = eps;
    auto sgn = [](Vec2 x) { return x.x > 0.5 ? 1.0 : (x.x < 0.5 ? -1.0 : 0.0); };
    p.f = [eps, sgn](Vec2 x, double u) { return (sgn(x) - u) / eps; };
    p.df_du = [eps](Vec2, double) { return -1.0 / eps; };
    p.F = [eps, sgn](Vec2 x, double u) { return (sgn(x) * u - 0.5 * u * u) / eps; };
    p.dt_default = eps;  // one linearisation step then solves the space exactly
    p.f_lipschitz = {1.0 / eps, true};
    p.sigma_closed = [eps](double l) { return std::abs(1.0 / l - 1.0 / eps); };
    p.linear = LinearStructure{[eps, sgn](Vec2 x) { return sgn(x) / eps; },
                               [eps](Vec2) { return -1.0 / eps; }, true};
    p.prefer_direct = true;
  } else if (id == "oscillation") {
    double eps = need_eps(1e-3);
    p.domain = DomainSpec::unit_square();
    p.epsilon = eps;
    p.f = [eps](Vec2 x, double u) { return ((x.x - 0.5) * u + 1.0) / eps; };
    p.df_du = [eps](Vec2 x, double) { return (x.x - 0.5) / eps; };
    p.F = [eps](Vec2 x, double u) { return (0.5 * (x.x - 0.5) * u * u + u) / eps; };
    p.dt_default = eps;
    p.initial_n_default = 32;
    p.f_lipschitz = {0.5 / eps, true};
    p.sigma_closed = [eps](double l) { return 0.5 / eps + 1.0 / l; };
    p.linear = LinearStructure{[eps](Vec2) { return 1.0 / eps; },
                               [eps](Vec2 x) { return (x.x - 0.5) / eps; }, false};
    p.prefer_direct = true;
  } else {
    throw ConfigError("unknown experiment '" + id + "'");
  }
  return p;
}

// sup over x and u of |df/du(x,u) + 1/lambda|; closed form when the problem
// provides one, otherwise a sampled estimate (flagged non-exact).
inline BoundValue sigma_f_bound(const Problem& p, double lambda) {
  if (p.sigma_closed) return {p.sigma_closed(lambda), p.f_lipschitz.exact};
  Vec2 lo, hi;
  p.domain.bounding_box(lo, hi);
  double sup = 0.0;
  for (int i = 0; i <= 32; ++i)
    for (int j = 0; j <= 32; ++j) {
      Vec2 x{lo.x + (hi.x - lo.x) * i / 32.0, lo.y + (hi.y - lo.y) * j / 32.0};
      if (i > 0 && i < 32 && j > 0 && j < 32 && !p.domain.contains(x)) continue;
      for (int k = 0; k <= 800; ++k) {
        double u = -8.0 + 16.0 * k / 800.0;
        sup = std::max(sup, std::abs(p.df_du(x, u) + 1.0 / lambda));
      }
    }
  return {sup, false};
}

// Smallest Dirichlet Laplace eigenvalue by inverse power iteration on a
// moderately fine uniform mesh; the Poincare constant is its reciprocal.
inline double smallest_laplace_eigenvalue(const DomainSpec& dom, int n = 16) {
  Mesh m = initial_mesh(dom, n);
  DofMap dm = DofMap::build(m);
  SparseSymMatrix A = assemble_stiffness(m, dm);
  SparseSymMatrix M = assemble_mass(m, dm);
  std::vector<double> x(dm.n_free, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> mx = M.apply(x);
    std::vector<double> y = cg_solve(A, mx, &x, 1e-12);
    double nm = std::sqrt(M.quadratic_form(y));
    for (double& v : y) v /= nm;
    double next = A.quadratic_form(y) / M.quadratic_form(y);
    bool done = it > 0 && std::abs(next - lambda) <= 1e-11 * next;
    lambda = next;
    x = std::move(y);
    if (done) break;
  }
  return lambda;
}

// ||v||^2 <= C_P ||grad v||^2 on H^1_0. Analytic on the unit square,
// numeric (cached) elsewhere.
inline double poincare_constant(const DomainSpec& dom) {
  if (dom.name == "unit_square") return 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
  static std::map<std::string, double> cache;
  auto it = cache.find(dom.name);
  if (it != cache.end()) return it->second;
  double c = 1.0 / smallest_laplace_eigenvalue(dom);
  cache.emplace(dom.name, c);
  return c;
}

inline double kappa_f(const Problem& p, double c_p) {
  return std::max(0.5 * p.f_lipschitz.value - 0.5 / c_p, 0.0);
}

// Guaranteed energy-decay rate of one linearisation step:
// E(u^n) - E(u^{n+1}) >= gamma_f ||u^n - u^{n+1}||_dt^2.
inline double gamma_f(const Problem& p, double dt, double c_p) {
  double kappa = kappa_f(p, c_p);
  if (!(1.0 / dt > kappa)) return 0.0;
  return std::min((1.0 / dt - kappa) / (dt / c_p + 1.0), 0.5 / dt);
}

}  // namespace semfem
