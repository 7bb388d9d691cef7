#pragma once

#include <vector>

#include "semfem/mesh.hpp"

namespace semfem {

// Free (non-Dirichlet) vertex numbering for the P1 space with homogeneous
// boundary values.
struct DofMap {
  std::vector<int> vertex_to_dof;  // -1 at boundary vertices
  std::vector<int> dof_to_vertex;
  int n_free = 0;

  static DofMap build(const Mesh& m) {
    DofMap dm;
    dm.vertex_to_dof.assign(m.vertex_count(), -1);
    for (int v = 0; v < m.vertex_count(); ++v)
      if (!m.boundary_vertex[v]) {
        dm.vertex_to_dof[v] = dm.n_free++;
        dm.dof_to_vertex.push_back(v);
      }
    return dm;
  }
};

// P1 function on a given refinement level, stored as free-dof coefficients.
// `lift` records a constant Dirichlet lift that was subtracted from the
// original unknown; it only matters when writing output.
struct FeFunction {
  int level = 0;
  std::vector<double> coeff;
  double lift = 0.0;

  static FeFunction zero(const DofMap& dm, int level = 0, double lift = 0.0) {
    return {level, std::vector<double>(dm.n_free, 0.0), lift};
  }
};

inline std::vector<double> vertex_values(const Mesh& m, const DofMap& dm, const FeFunction& u) {
  std::vector<double> vals(m.vertex_count(), 0.0);
  for (int d = 0; d < dm.n_free; ++d) vals[dm.dof_to_vertex[d]] = u.coeff[d];
  return vals;
}

// Exact P1 embedding into the bisected mesh: new vertices are edge midpoints
// of the parent mesh, so their value is the parent-endpoint average.
inline FeFunction prolongate(const FeFunction& u, const RefinementRecord& rec,
                             const DofMap& dm_old, const Mesh& child, const DofMap& dm_new) {
  std::vector<double> vals(child.vertex_count(), 0.0);
  for (int d = 0; d < dm_old.n_free; ++d) vals[dm_old.dof_to_vertex[d]] = u.coeff[d];
  for (std::size_t k = 0; k < rec.new_vertex_parents.size(); ++k) {
    auto [a, b] = rec.new_vertex_parents[k];
    vals[rec.old_vertex_count + static_cast<int>(k)] = 0.5 * (vals[a] + vals[b]);
  }
  FeFunction out{u.level + 1, std::vector<double>(dm_new.n_free, 0.0), u.lift};
  for (int d = 0; d < dm_new.n_free; ++d) out.coeff[d] = vals[dm_new.dof_to_vertex[d]];
  return out;
}

}  // namespace semfem
