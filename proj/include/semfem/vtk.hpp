#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>

#include "semfem/errors.hpp"
#include "semfem/femspace.hpp"
#include "semfem/mesh.hpp"

namespace semfem {

namespace detail {

// Shortest decimal that round-trips the double (to_chars default).
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Legacy ASCII VTK unstructured grid with the solution (lift added back) as
// point data. Deterministic output: shortest round-trip number formatting.
inline void write_vtk(const std::string& path, const Mesh& m, const DofMap& dm,
                      const FeFunction& u) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  std::vector<double> vals = vertex_values(m, dm, u);
  os << "# vtk DataFile Version 3.0\n";
  os << "adaptive P1 solution\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.vertex_count() << " double\n";
  for (const Vec2& v : m.vertices)
    os << detail::format_double(v.x) << ' ' << detail::format_double(v.y) << " 0\n";
  os << "CELLS " << m.tri_count() << ' ' << 4 * m.tri_count() << '\n';
  for (const auto& t : m.tris) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << m.tri_count() << '\n';
  for (int e = 0; e < m.tri_count(); ++e) os << "5\n";
  os << "POINT_DATA " << m.vertex_count() << '\n';
  os << "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : vals) os << detail::format_double(v + u.lift) << '\n';
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace semfem
