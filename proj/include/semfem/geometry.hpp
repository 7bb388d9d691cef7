#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace semfem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Simple polygonal domain, vertices in counter-clockwise order.
struct DomainSpec {
  std::string name;
  std::vector<Vec2> polygon;

  static DomainSpec unit_square() {
    return {"unit_square", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  }

  // (0,2)^2 minus the closed lower-right square [1,2]x[0,1].
  static DomainSpec lshape() {
    return {"lshape", {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {0, 2}}};
  }

  static DomainSpec from_polygon(std::string name, std::vector<Vec2> poly) {
    return {std::move(name), std::move(poly)};
  }

  double area() const {
    double a = 0.0;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++)
      a += cross(polygon[j], polygon[i]);
    return 0.5 * a;
  }

  void bounding_box(Vec2& lo, Vec2& hi) const {
    lo = hi = polygon.front();
    for (Vec2 p : polygon) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
  }

  double diameter() const {
    Vec2 lo, hi;
    bounding_box(lo, hi);
    return (hi - lo).norm();
  }

  // Crossing-number test. Callers only probe points that are bounded away
  // from the polygon edges (grid cell centers), so no epsilon handling.
  bool contains(Vec2 p) const {
    bool inside = false;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
      Vec2 a = polygon[i], b = polygon[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        double t = (p.y - a.y) / (b.y - a.y);
        if (p.x < a.x + t * (b.x - a.x)) inside = !inside;
      }
    }
    return inside;
  }

  // Distance from p to the polygon boundary.
  double boundary_distance(Vec2 p) const {
    double d = std::numeric_limits<double>::max();
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
      Vec2 a = polygon[j], b = polygon[i];
      Vec2 ab = b - a;
      double len2 = ab.dot(ab);
      double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      d = std::min(d, (p - (a + t * ab)).norm());
    }
    return d;
  }
};

}  // namespace semfem
