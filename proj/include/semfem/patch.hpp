#pragma once

#include <array>
#include <vector>

#include "semfem/femspace.hpp"
#include "semfem/mesh.hpp"

namespace semfem {

// Virtual subdivision of the patch of an element kappa: kappa is red-refined
// through its three edge midpoints, each face neighbour is green-bisected
// toward the shared midpoint. Nothing is written back to the mesh; the
// subdivision only carries the local enrichment space, which is spanned by
// the P1 hats at the midpoints of the interior edges of kappa.
struct PatchSubdivision {
  std::vector<Vec2> verts;                // local coordinates
  std::vector<double> u_vals;             // current iterate at local vertices
  std::vector<std::array<int, 3>> tris;   // sub-triangles (CCW)
  std::vector<int> hat_vertex;            // local vertex of each midpoint hat
  std::vector<int> hat_edge;              // which local edge of kappa (0,1,2)
  std::vector<int> members;               // global elements covered (kappa first)

  int n_hats() const { return static_cast<int>(hat_vertex.size()); }
  int n_verts() const { return static_cast<int>(verts.size()); }
};

inline PatchSubdivision build_patch_subdivision(const Mesh& m, const DofMap& dm,
                                                const FeFunction& u, int kappa) {
  const auto& t = m.tris[kappa];
  PatchSubdivision p;
  p.members.push_back(kappa);

  auto value_at = [&](int v) {
    int d = dm.vertex_to_dof[v];
    return d < 0 ? 0.0 : u.coeff[d];
  };
  auto add_vertex = [&](Vec2 pos, double val) {
    p.verts.push_back(pos);
    p.u_vals.push_back(val);
    return p.n_verts() - 1;
  };

  // corners 0,1,2 then edge midpoints 3,4,5 (midpoint k on edge k)
  for (int i = 0; i < 3; ++i) add_vertex(m.vertices[t[i]], value_at(t[i]));
  for (int i = 0; i < 3; ++i)
    add_vertex((p.verts[i] + p.verts[(i + 1) % 3]) * 0.5,
               0.5 * (p.u_vals[i] + p.u_vals[(i + 1) % 3]));

  // red refinement of kappa
  p.tris.push_back({0, 3, 5});
  p.tris.push_back({1, 4, 3});
  p.tris.push_back({2, 5, 4});
  p.tris.push_back({3, 4, 5});

  for (int i = 0; i < 3; ++i) {
    int nb = m.neighbor[kappa][i];
    if (nb < 0) continue;  // boundary edge: midpoint is constrained, no hat
    p.members.push_back(nb);
    // opposite vertex of the neighbour
    const auto& s = m.tris[nb];
    int w = -1;
    for (int k = 0; k < 3; ++k)
      if (s[k] != t[i] && s[k] != t[(i + 1) % 3]) w = s[k];
    int lw = add_vertex(m.vertices[w], value_at(w));
    // green bisection toward the shared midpoint; kappa's edge i runs
    // (i) -> (i+1), so (w, i+1, mid) and (i, w, mid) are both CCW.
    p.tris.push_back({lw, (i + 1) % 3, 3 + i});
    p.tris.push_back({i, lw, 3 + i});
    p.hat_vertex.push_back(3 + i);
    p.hat_edge.push_back(i);
  }
  return p;
}

}  // namespace semfem
