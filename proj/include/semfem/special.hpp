#pragma once

#include <cmath>
#include <stdexcept>

namespace semfem {

// Exponential integral E1(y) for y > 0, to ~1e-14 relative accuracy.
// Power series below y = 1, continued fraction (modified Lentz) above.
inline double expint_e1(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("expint_e1: argument must be positive");
  if (y <= 1.0) {
    const double euler_gamma = 0.5772156649015328606;
    double sum = 0.0, term = 1.0;
    for (int k = 1; k <= 60; ++k) {
      term *= -y / k;
      double add = -term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return -euler_gamma - std::log(y) + sum;
  }
  // E1(y) = e^-y / (y+1 - 1/(y+3 - 4/(y+5 - 9/(...))))
  const double tiny = 1e-300;
  double f = y + 1.0, C = f, D = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double a = -static_cast<double>(k) * k;
    double bk = y + 2.0 * k + 1.0;
    D = bk + a * D;
    if (std::abs(D) < tiny) D = tiny;
    C = bk + a / C;
    if (std::abs(C) < tiny) C = tiny;
    D = 1.0 / D;
    double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-y) / f;
}

// Ei(x) for x < 0 only (that is all the library needs): Ei(x) = -E1(-x).
inline double expint_ei(double x) {
  if (!(x < 0.0)) throw std::invalid_argument("expint_ei: argument must be negative");
  return -expint_e1(-x);
}

}  // namespace semfem
