#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "semfem/assembly.hpp"
#include "semfem/energy.hpp"
#include "semfem/errors.hpp"
#include "semfem/problem.hpp"
#include "semfem/quadrature.hpp"

using namespace semfem;

namespace {

const char* kExperiments[] = {"sine_gordon_manufactured", "sine_gordon_singular",
                              "lshape_exp", "arrhenius", "sign_discontinuity",
                              "oscillation"};

Vec2 random_domain_point(const DomainSpec& dom, std::mt19937& gen) {
  Vec2 lo, hi;
  dom.bounding_box(lo, hi);
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
  for (;;) {
    Vec2 p{ux(gen), uy(gen)};
    if (dom.contains(p)) return p;
  }
}

}  // namespace

TEST_CASE("every builtin constructs and has consistent pieces") {
  for (const char* id : kExperiments) {
    Problem p = builtin(id);
    CHECK(p.name == id);
    REQUIRE(p.f);
    REQUIRE(p.df_du);
    REQUIRE(p.F);
    CHECK(p.dt_default > 0.0);
    CHECK(p.f_lipschitz.value > 0.0);
    // F(x, 0) = 0 by construction
    auto gen = oracle::rng(1);
    for (int k = 0; k < 10; ++k) {
      Vec2 x = random_domain_point(p.domain, gen);
      CHECK(std::abs(p.F(x, 0.0)) < 1e-12 * (1.0 + std::abs(p.f(x, 0.0))));
    }
  }
  CHECK_THROWS_AS(builtin("no_such_thing"), ConfigError);
}

TEST_CASE("epsilon is accepted only where it is a real parameter") {
  CHECK(builtin("sine_gordon_singular", 1e-2).epsilon == 1e-2);
  CHECK(builtin("lshape_exp", 0.5).epsilon == 0.5);
  CHECK(builtin("oscillation", 1e-2).epsilon == 1e-2);
  CHECK_THROWS_AS(builtin("sine_gordon_manufactured", 0.1), ConfigError);
  CHECK_THROWS_AS(builtin("arrhenius", 0.1), ConfigError);
  CHECK_THROWS_AS(builtin("sign_discontinuity", 0.1), ConfigError);
  CHECK_THROWS_AS(builtin("sine_gordon_singular", -1.0), ConfigError);
}

TEST_CASE("F is the u-antiderivative of f") {
  auto gen = oracle::rng(2024);
  std::uniform_real_distribution<double> ut(-3.0, 3.0);
  for (const char* id : kExperiments) {
    Problem p = builtin(id);
    double scale_eps = p.epsilon > 0.0 ? p.epsilon : 1.0;
    for (int k = 0; k < 100; ++k) {
      Vec2 x = random_domain_point(p.domain, gen);
      double t = ut(gen);
      double ref = oracle::integrate_1d([&](double s) { return p.f(x, s); }, 0.0, t);
      INFO(id << " at t = " << t);
      CHECK(p.F(x, t) == Catch::Approx(ref).margin(1e-9 / scale_eps + 1e-9 * std::abs(ref)));
    }
  }
}

TEST_CASE("df_du matches a centered difference of f") {
  auto gen = oracle::rng(5);
  std::uniform_real_distribution<double> ut(-2.0, 2.0);
  for (const char* id : kExperiments) {
    Problem p = builtin(id);
    for (int k = 0; k < 40; ++k) {
      Vec2 x = random_domain_point(p.domain, gen);
      double t = ut(gen);
      if (p.name == "arrhenius" && std::abs(t + 2.0) < 0.05) continue;  // kink of |s|
      double h = 1e-6;
      double fd = (p.f(x, t + h) - p.f(x, t - h)) / (2.0 * h);
      double scale = p.f_lipschitz.value;
      CHECK(p.df_du(x, t) == Catch::Approx(fd).margin(1e-7 * scale + 1e-10));
    }
  }
}

TEST_CASE("frozen point values of the reaction terms") {
  const double pi = std::numbers::pi;
  Problem sg = builtin("sine_gordon_manufactured");
  // at the exact solution value u = 1 in the domain center the source cancels
  // everything except the manufactured part
  CHECK(sg.f(Vec2{0.5, 0.5}, 1.0) == Catch::Approx(2.0 * pi * pi).epsilon(1e-14));
  REQUIRE(sg.exact_solution);
  CHECK(sg.exact_solution(Vec2{0.5, 0.5}) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(sg.exact_solution(Vec2{0.25, 0.5}) ==
        Catch::Approx(std::sin(pi * 0.25)).epsilon(1e-14));

  Problem ar = builtin("arrhenius");
  // reaction value phi(1/2) = (1/2) e^{-2}, reached at w = -3/2
  CHECK(ar.f(Vec2{1.0, 1.0}, -1.5) == Catch::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(ar.f(Vec2{1.0, 1.0}, -2.0) == 0.0);
  // frozen primitive values
  CHECK(detail::arrhenius_primitive(2.0) ==
        Catch::Approx(-0.23312973245160779).epsilon(1e-12));
  CHECK(detail::arrhenius_primitive(0.3) ==
        Catch::Approx(0.0015862860003279241).epsilon(1e-11));

  Problem sd = builtin("sign_discontinuity");
  CHECK(sd.f(Vec2{0.75, 0.5}, 0.0) == Catch::Approx(1e8).epsilon(1e-15));
  CHECK(sd.f(Vec2{0.25, 0.5}, 0.0) == Catch::Approx(-1e8).epsilon(1e-15));
  CHECK(sd.epsilon == 1e-8);
}

TEST_CASE("the singular sine-gordon plateau solves u + sin u = 1") {
  double root = 0.51097342938856911;
  CHECK(root + std::sin(root) == Catch::Approx(1.0).margin(1e-15));
  Problem p = builtin("sine_gordon_singular");
  CHECK(p.f(Vec2{0.5, 0.5}, root) == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("poincare constants") {
  CHECK(poincare_constant(DomainSpec::unit_square()) ==
        Catch::Approx(1.0 / (2.0 * std::numbers::pi * std::numbers::pi)).epsilon(1e-15));
  double lam = smallest_laplace_eigenvalue(DomainSpec::lshape(), 16);
  CHECK(lam > 9.5);
  CHECK(lam < 10.0);
  double cp = poincare_constant(DomainSpec::lshape());
  CHECK(cp == Catch::Approx(1.0 / lam).epsilon(1e-9));
}

TEST_CASE("stability constants carry their closed forms") {
  const double pi2 = std::numbers::pi * std::numbers::pi;

  Problem sg = builtin("sine_gordon_manufactured");
  CHECK(sg.f_lipschitz.value == 2.0);
  CHECK(sg.f_lipschitz.exact);
  double cp = poincare_constant(sg.domain);
  CHECK(kappa_f(sg, cp) == 0.0);  // 1 - pi^2 < 0
  CHECK(gamma_f(sg, 0.5, cp) == Catch::Approx(2.0 / (pi2 + 1.0)).epsilon(1e-14));

  Problem s2 = builtin("sine_gordon_singular", 1e-3);
  CHECK(s2.f_lipschitz.value == Catch::Approx(2000.0).epsilon(1e-15));
  // both branches of the rate coincide at dt = eps / 2
  CHECK(gamma_f(s2, 0.5e-3, poincare_constant(s2.domain)) ==
        Catch::Approx(1000.0).epsilon(1e-12));

  Problem ls = builtin("lshape_exp", 1e-2);
  CHECK(ls.f_lipschitz.value ==
        Catch::Approx(std::sqrt(2.0) * std::exp(-0.5) * 100.0).epsilon(1e-14));
  CHECK(gamma_f(ls, 1e-2, poincare_constant(ls.domain)) ==
        Catch::Approx(50.0).epsilon(1e-12));

  Problem sd = builtin("sign_discontinuity");
  CHECK(sd.f_lipschitz.value == Catch::Approx(1e8).epsilon(1e-15));
  Problem os = builtin("oscillation", 1e-3);
  CHECK(os.f_lipschitz.value == Catch::Approx(500.0).epsilon(1e-15));

  Problem ar = builtin("arrhenius");
  CHECK(!ar.f_lipschitz.exact);  // sampled
  CHECK(ar.f_lipschitz.value > 0.9);
  CHECK(ar.f_lipschitz.value < 1.1);
}

TEST_CASE("sigma_f closed forms") {
  Problem sg = builtin("sine_gordon_manufactured");
  CHECK(sigma_f_bound(sg, 0.5).value == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(sigma_f_bound(sg, 0.5).exact);
  CHECK(sigma_f_bound(sg, 0.25).value == Catch::Approx(4.0).epsilon(1e-15));

  Problem ls = builtin("lshape_exp", 1e-2);
  CHECK(sigma_f_bound(ls, 1e-2).value ==
        Catch::Approx(std::sqrt(2.0) * std::exp(-0.5) * 100.0 + 100.0).epsilon(1e-14));

  Problem ar = builtin("arrhenius");
  BoundValue s = sigma_f_bound(ar, 1.0);
  CHECK(!s.exact);
  CHECK(s.value >= 1.0);  // at least 1/lambda
  CHECK(s.value <= 1.0 + ar.f_lipschitz.value + 1e-12);
}

TEST_CASE("sampled sigma is a true bound along random evaluations") {
  auto gen = oracle::rng(31);
  std::uniform_real_distribution<double> ut(-4.0, 4.0);
  Problem ar = builtin("arrhenius");
  double lam = 1.0;
  double bound = sigma_f_bound(ar, lam).value * (1.0 + 1e-6) + 1e-9;
  for (int k = 0; k < 2000; ++k) {
    Vec2 x = random_domain_point(ar.domain, gen);
    double t = ut(gen);
    CHECK(std::abs(ar.df_du(x, t) + 1.0 / lam) <= bound);
  }
}

TEST_CASE("discrete energy of the center hat under f = 1") {
  // custom problem: f(x, u) = 1, F(x, u) = u, energy 1/2 |grad|^2 - int u
  Problem p = builtin("sine_gordon_manufactured");
  p.f = [](Vec2, double) { return 1.0; };
  p.df_du = [](Vec2, double) { return 0.0; };
  p.F = [](Vec2, double u) { return u; };

  Mesh m = initial_mesh(DomainSpec::unit_square(), 2);
  DofMap dm = DofMap::build(m);
  REQUIRE(dm.n_free == 1);
  auto A = assemble_stiffness(m, dm);
  FeFunction u = FeFunction::zero(dm);
  u.coeff[0] = 1.0;
  double e = energy(p, m, dm, u, A, triangle_quadrature(4));
  // 1/2 * 4 - 1/4
  CHECK(e == Catch::Approx(1.75).epsilon(1e-14));

  FeFunction z = FeFunction::zero(dm);
  CHECK(energy(p, m, dm, z, A, triangle_quadrature(4)) == 0.0);
}

TEST_CASE("energy expansion remainder obeys the sigma bound") {
  Problem p = builtin("sine_gordon_manufactured");
  Mesh m = initial_mesh(p.domain, 4);
  DofMap dm = DofMap::build(m);
  auto A = assemble_stiffness(m, dm);
  auto M = assemble_mass(m, dm);
  const auto& q = triangle_quadrature(4);
  double lam = p.dt_default;
  double sigma = sigma_f_bound(p, lam).value;

  auto gen = oracle::rng(404);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    FeFunction u = FeFunction::zero(dm), v = FeFunction::zero(dm);
    for (double& c : u.coeff) c = val(gen);
    for (double& c : v.coeff) c = val(gen);
    std::vector<double> delta(dm.n_free);
    for (int i = 0; i < dm.n_free; ++i) delta[i] = v.coeff[i] - u.coeff[i];

    double eu = energy(p, m, dm, u, A, q);
    double ev = energy(p, m, dm, v, A, q);
    auto pairing = energy_derivative_pairing(p, m, dm, u, A, q);
    double lin = 0.0;
    for (int i = 0; i < dm.n_free; ++i) lin += pairing[i] * delta[i];
    double nl = norm_lambda(delta, A, M, lam);
    double psi = ev - eu - lin - 0.5 / lam * nl * nl;
    double l2sq = M.quadratic_form(delta);
    CHECK(std::abs(psi) <= 0.5 * sigma * l2sq + 1e-10 * (1.0 + std::abs(eu) + std::abs(ev)));
  }
}

TEST_CASE("energy representation controls the energy by the lambda norm") {
  Problem p = builtin("sine_gordon_manufactured");
  Mesh m = initial_mesh(p.domain, 4);
  DofMap dm = DofMap::build(m);
  auto A = assemble_stiffness(m, dm);
  auto M = assemble_mass(m, dm);
  const auto& q = triangle_quadrature(4);
  double lam = p.dt_default;
  double sigma = sigma_f_bound(p, lam).value;

  // ||f(.,0)||_{L^2} via the degree-10 oracle
  double f0sq = 0.0;
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    f0sq += oracle::integrate_triangle(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]],
                                       [&](Vec2 x) { double f = p.f(x, 0.0); return f * f; });
  }
  double f0 = std::sqrt(f0sq);

  auto gen = oracle::rng(73);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    FeFunction v = FeFunction::zero(dm);
    for (double& c : v.coeff) c = val(gen);
    double ev = energy(p, m, dm, v, A, q);
    double nl = norm_lambda(v.coeff, A, M, lam);
    double l2 = std::sqrt(M.quadratic_form(v.coeff));
    double bound = 0.5 / lam * nl * nl + 0.5 * sigma * l2 * l2 + f0 * l2 + 1e-9;
    CHECK(std::abs(ev) <= bound);
  }
}

TEST_CASE("arrhenius lift recovers the original equation") {
  // the stored unknown is w = v - 2 with v the physical variable; the
  // reaction only enters through v = w + 2, so shifting back must reproduce
  // the same values
  Problem ar = builtin("arrhenius");
  CHECK(ar.dirichlet_lift == 2.0);
  auto gen = oracle::rng(6);
  std::uniform_real_distribution<double> uv(-1.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    double v = uv(gen);
    CHECK(ar.f(Vec2{1.0, 1.0}, v - 2.0) ==
          Catch::Approx(detail::arrhenius_phi(v)).margin(1e-15));
  }
}
