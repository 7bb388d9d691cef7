#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semfem/errors.hpp"
#include "semfem/geometry.hpp"

namespace semfem {

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace detail

// Shared-edge adjacency: neighbor[e][i] is the element across local edge i
// (the edge from vertex i to vertex (i+1)%3), or -1 on the boundary.
inline std::vector<std::array<int, 3>> face_neighbors(
    const std::vector<std::array<int, 3>>& tris) {
  std::vector<std::array<int, 3>> nb(tris.size(), {-1, -1, -1});
  std::unordered_map<std::uint64_t, std::pair<int, int>> open;
  open.reserve(tris.size() * 2);
  for (int e = 0; e < static_cast<int>(tris.size()); ++e) {
    for (int i = 0; i < 3; ++i) {
      std::uint64_t k = detail::edge_key(tris[e][i], tris[e][(i + 1) % 3]);
      auto it = open.find(k);
      if (it == open.end()) {
        open.emplace(k, std::pair{e, i});
      } else {
        auto [e2, i2] = it->second;
        if (e2 < 0) throw SolverError("face_neighbors: edge shared by more than two elements");
        nb[e][i] = e2;
        nb[e2][i2] = e;
        it->second = {-2, -2};
      }
    }
  }
  return nb;
}

// Conforming triangle mesh. Elements are counter-clockwise; the refinement
// edge of element t is its local edge 0, i.e. (t[0], t[1]), and t[2] is the
// newest vertex. The initial meshes put the refinement edge on the cell
// diagonal (the longest edge), which keeps every descendant right-isosceles.
struct Mesh {
  DomainSpec domain;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> tris;
  std::vector<std::array<int, 3>> neighbor;
  std::vector<char> boundary_vertex;
  std::vector<int> generation;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int tri_count() const { return static_cast<int>(tris.size()); }

  double tri_area(int e) const {
    const auto& t = tris[e];
    return 0.5 * cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
  }

  Vec2 centroid(int e) const {
    const auto& t = tris[e];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) * (1.0 / 3.0);
  }

  double min_angle() const {
    double worst = std::numbers::pi;
    for (int e = 0; e < tri_count(); ++e) {
      const auto& t = tris[e];
      for (int i = 0; i < 3; ++i) {
        Vec2 u = vertices[t[(i + 1) % 3]] - vertices[t[i]];
        Vec2 v = vertices[t[(i + 2) % 3]] - vertices[t[i]];
        worst = std::min(worst, std::atan2(std::abs(cross(u, v)), u.dot(v)));
      }
    }
    return worst;
  }

  void rebuild_connectivity() {
    neighbor = face_neighbors(tris);
    boundary_vertex.assign(vertices.size(), 0);
    for (int e = 0; e < tri_count(); ++e)
      for (int i = 0; i < 3; ++i)
        if (neighbor[e][i] < 0) {
          boundary_vertex[tris[e][i]] = 1;
          boundary_vertex[tris[e][(i + 1) % 3]] = 1;
        }
  }

  void validate() const {
    double sum = 0.0;
    for (int e = 0; e < tri_count(); ++e) {
      double a = tri_area(e);
      if (!(a > 0.0)) throw SolverError("mesh: non-positive element area");
      sum += a;
    }
    double ref = domain.area();
    if (std::abs(sum - ref) > 1e-12 * std::abs(ref))
      throw SolverError("mesh: element areas do not sum to the domain area");
  }
};

// Uniform initial mesh with grid spacing 1/n over the domain bounding box;
// cells whose center lies in the polygon are kept and split along the
// bottom-left to top-right diagonal.
inline Mesh initial_mesh(const DomainSpec& dom, int n) {
  if (n < 1) throw ConfigError("initial_mesh: n must be >= 1");
  Mesh m;
  m.domain = dom;
  Vec2 lo, hi;
  dom.bounding_box(lo, hi);
  const double h = 1.0 / n;
  const int nx = static_cast<int>(std::lround((hi.x - lo.x) * n));
  const int ny = static_cast<int>(std::lround((hi.y - lo.y) * n));
  std::unordered_map<std::int64_t, int> vid;
  auto vertex = [&](int i, int j) {
    std::int64_t key = static_cast<std::int64_t>(j) * (nx + 1) + i;
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    int id = m.vertex_count();
    m.vertices.push_back({lo.x + i * h, lo.y + j * h});
    vid.emplace(key, id);
    return id;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec2 center{lo.x + (i + 0.5) * h, lo.y + (j + 0.5) * h};
      if (!dom.contains(center)) continue;
      int a = vertex(i, j), b = vertex(i + 1, j);
      int c = vertex(i + 1, j + 1), d = vertex(i, j + 1);
      m.tris.push_back({c, a, b});
      m.tris.push_back({a, c, d});
    }
  if (m.tris.empty()) throw ConfigError("initial_mesh: no cell center inside the domain");
  m.generation.assign(m.tris.size(), 0);
  m.rebuild_connectivity();
  m.validate();
  return m;
}

// What bisect() reports back so functions can be carried to the new mesh.
// New vertices are edge midpoints of the input mesh, so both parents are
// input-mesh vertices and prolongation is a single averaging pass.
struct RefinementRecord {
  int old_vertex_count = 0;
  int old_tri_count = 0;
  std::vector<std::pair<int, int>> new_vertex_parents;
};

namespace detail {

// Shared splitting engine. Takes the initially split edges (key -> -1),
// closes the set so no element keeps a split edge without also splitting its
// refinement edge, and rebuilds the mesh. The fixpoint is reached in finitely
// many rounds because generations only decrease along refinement-edge chains.
// Midpoints are created in (element id, local edge) order.
inline std::pair<Mesh, RefinementRecord> bisect_seeded(
    const Mesh& m, std::unordered_map<std::uint64_t, int> midpoint) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e = 0; e < m.tri_count(); ++e) {
      const auto& t = m.tris[e];
      bool any = false;
      for (int i = 0; i < 3; ++i)
        any = any || midpoint.count(detail::edge_key(t[i], t[(i + 1) % 3])) > 0;
      if (any && midpoint.emplace(detail::edge_key(t[0], t[1]), -1).second) changed = true;
    }
  }

  Mesh out;
  out.domain = m.domain;
  out.vertices = m.vertices;
  RefinementRecord rec;
  rec.old_vertex_count = m.vertex_count();
  rec.old_tri_count = m.tri_count();

  std::vector<char> new_boundary;
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    for (int i = 0; i < 3; ++i) {
      int a = t[i], b = t[(i + 1) % 3];
      auto it = midpoint.find(detail::edge_key(a, b));
      if (it == midpoint.end() || it->second >= 0) continue;
      it->second = out.vertex_count();
      out.vertices.push_back((m.vertices[a] + m.vertices[b]) * 0.5);
      rec.new_vertex_parents.emplace_back(a, b);
      new_boundary.push_back(m.neighbor[e][i] < 0);
    }
  }

  auto emit = [&out](int v0, int v1, int v2, int gen) {
    out.tris.push_back({v0, v1, v2});
    out.generation.push_back(gen);
  };
  for (int e = 0; e < m.tri_count(); ++e) {
    const auto& t = m.tris[e];
    const int gen = m.generation[e];
    auto mid = [&](int a, int b) {
      auto it = midpoint.find(detail::edge_key(a, b));
      return it == midpoint.end() ? -1 : it->second;
    };
    int m0 = mid(t[0], t[1]);
    if (m0 < 0) {
      emit(t[0], t[1], t[2], gen);
      continue;
    }
    // children of (v0,v1,v2) at the refinement-edge midpoint: (v2,v0,m0), (v1,v2,m0)
    int m2 = mid(t[2], t[0]);
    if (m2 < 0)
      emit(t[2], t[0], m0, gen + 1);
    else {
      emit(m0, t[2], m2, gen + 2);
      emit(t[0], m0, m2, gen + 2);
    }
    int m1 = mid(t[1], t[2]);
    if (m1 < 0)
      emit(t[1], t[2], m0, gen + 1);
    else {
      emit(m0, t[1], m1, gen + 2);
      emit(t[2], m0, m1, gen + 2);
    }
  }

  out.rebuild_connectivity();
  // Boundary status of a midpoint is inherited from its parent edge; the
  // connectivity rebuild must agree, and the cross-check below catches any
  // closure bug that would leave a hanging node.
  for (std::size_t k = 0; k < new_boundary.size(); ++k) {
    int v = rec.old_vertex_count + static_cast<int>(k);
    if (out.boundary_vertex[v] != new_boundary[k])
      throw SolverError("bisect: hanging node or boundary mismatch");
  }
  out.validate();
  return {std::move(out), std::move(rec)};
}

}  // namespace detail

// Newest-vertex bisection of the marked elements plus conforming closure.
inline std::pair<Mesh, RefinementRecord> bisect(const Mesh& m, const std::vector<int>& marked) {
  std::unordered_map<std::uint64_t, int> midpoint;  // edge key -> new vertex id (-1 = pending)
  for (int e : marked) {
    if (e < 0 || e >= m.tri_count()) throw SolverError("bisect: marked element out of range");
    midpoint.emplace(detail::edge_key(m.tris[e][0], m.tris[e][1]), -1);
  }
  return detail::bisect_seeded(m, std::move(midpoint));
}

// Splits all three edges of every marked element (two rounds of bisection,
// four similar children each) plus the usual conforming closure. The local
// decay estimates price in hat functions at all edge midpoints of a marked
// element, so the refinement has to actually provide those vertices; a
// single bisection would deliver the predicted drop a level or two late.
inline std::pair<Mesh, RefinementRecord> bisect_full(const Mesh& m, const std::vector<int>& marked) {
  std::unordered_map<std::uint64_t, int> midpoint;
  for (int e : marked) {
    if (e < 0 || e >= m.tri_count()) throw SolverError("bisect_full: marked element out of range");
    const auto& t = m.tris[e];
    for (int i = 0; i < 3; ++i)
      midpoint.emplace(detail::edge_key(t[i], t[(i + 1) % 3]), -1);
  }
  return detail::bisect_seeded(m, std::move(midpoint));
}

}  // namespace semfem
