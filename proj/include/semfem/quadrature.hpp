#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace semfem {

// Quadrature point on the reference triangle (0,0)-(1,0)-(0,1), given by the
// barycentric coordinates of vertices 1 and 2 (l0 = 1 - l1 - l2). Weights sum
// to one, so  int_T f = |T| * sum_i w_i f(p_i).
struct QuadPoint {
  double l1, l2, w;
};

struct QuadratureRule {
  int order = 0;  // exact for polynomials of this total degree
  std::vector<QuadPoint> points;
};

namespace detail {

// Gauss-Legendre nodes/weights on [0,1], by Newton iteration on P_m.
// Deterministic to machine precision for the small m used here.
inline void gauss_legendre01(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // map [-1,1] -> [0,1]
    x[i] = 0.5 * (1.0 - z);
    x[m - 1 - i] = 0.5 * (1.0 + z);
    w[i] = w[m - 1 - i] = 1.0 / ((1.0 - z * z) * pp * pp);
  }
}

}  // namespace detail

// Collapsed (Duffy) m x m Gauss-Legendre product rule on the reference
// triangle: x = s, y = t(1-s). Exact through total degree 2m-2.
inline QuadratureRule duffy_rule(int m) {
  std::vector<double> xs, ws;
  detail::gauss_legendre01(m, xs, ws);
  QuadratureRule r;
  r.order = 2 * m - 2;
  r.points.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = xs[i], t = xs[j];
      r.points.push_back({s, t * (1.0 - s), 2.0 * ws[i] * ws[j] * (1.0 - s)});
    }
  return r;
}

// Symmetric rules of exactness degree 1, 2, 4, 6.
inline const QuadratureRule& triangle_quadrature(int order) {
  static const QuadratureRule r1{1, {{1.0 / 3.0, 1.0 / 3.0, 1.0}}};
  static const QuadratureRule r2{2,
                                 {{0.5, 0.0, 1.0 / 3.0},
                                  {0.5, 0.5, 1.0 / 3.0},
                                  {0.0, 0.5, 1.0 / 3.0}}};
  // Two three-point orbits; constants solve the degree-4 moment equations.
  static const QuadratureRule r4 = [] {
    const double a = 0.44594849091596489, wa = 0.22338158967801147;
    const double b = 0.09157621350977074, wb = 0.10995174365532187;
    QuadratureRule r{4, {}};
    for (auto [c, wc] : {std::pair{a, wa}, std::pair{b, wb}}) {
      r.points.push_back({c, c, wc});
      r.points.push_back({1.0 - 2.0 * c, c, wc});
      r.points.push_back({c, 1.0 - 2.0 * c, wc});
    }
    return r;
  }();
  static const QuadratureRule r6 = duffy_rule(4);
  switch (order) {
    case 1: return r1;
    case 2: return r2;
    case 4: return r4;
    case 6: return r6;
    default: throw std::invalid_argument("triangle_quadrature: order must be 1, 2, 4 or 6");
  }
}

}  // namespace semfem
