#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "semfem/adaptive.hpp"
#include "semfem/config.hpp"
#include "semfem/vtk.hpp"

namespace semfem {

inline Problem problem_from_config(const RunConfig& cfg) {
  return builtin(cfg.experiment, cfg.epsilon.value_or(0.0));
}

inline AdaptiveParams params_from_config(const RunConfig& cfg, const Problem& p) {
  AdaptiveParams prm;
  prm.alpha = cfg.alpha;
  prm.theta = cfg.theta;
  prm.dt = cfg.dt.value_or(0.0);
  prm.max_dof = cfg.max_dof.value_or(0.0);
  prm.initial_n = cfg.initial_n.value_or(0);
  prm.quad_order = cfg.quad_order;
  prm.decay = cfg.decay;
  prm.max_inner = cfg.max_inner;
  prm.cg_tol = cfg.cg_tol;
  prm.timing = cfg.timing;
  switch (cfg.direct) {
    case DirectMode::automatic: prm.direct = p.prefer_direct; break;
    case DirectMode::on: prm.direct = true; break;
    case DirectMode::off: prm.direct = false; break;
  }
  if (prm.direct && !p.linear)
    throw ConfigError("direct = on requires an experiment that is linear in u");
  return prm;
}

// Energy of the known solution, by a composite high-order rule on a fine
// uniform background mesh. Only meaningful when the problem carries an exact
// solution; the rule is far beyond the P1 scale, so the value is exact to
// near machine precision.
inline double exact_energy(const Problem& p) {
  if (!p.exact_solution || !p.exact_gradient)
    throw ConfigError("exact_energy: experiment has no known solution");
  Mesh m = initial_mesh(p.domain, 64);
  QuadratureRule q = duffy_rule(6);  // degree 10
  double e = 0.0;
  for (int el = 0; el < m.tri_count(); ++el) {
    const auto& t = m.tris[el];
    Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    double area = m.tri_area(el);
    for (const auto& qp : q.points) {
      double l0 = 1.0 - qp.l1 - qp.l2;
      Vec2 x = l0 * a + qp.l1 * b + qp.l2 * c;
      Vec2 g = p.exact_gradient(x);
      e += area * qp.w * (0.5 * g.dot(g) - p.F(x, p.exact_solution(x)));
    }
  }
  return e;
}

namespace detail {

inline std::string csv_cell(double v) { return format_double(v); }

inline void write_records_csv(const std::filesystem::path& path,
                              const std::vector<RunRecord>& records, bool timing) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  os << "N,dof,nstar,energy,residual,error,q,walltime\n";
  for (const RunRecord& r : records) {
    os << r.level << ',' << r.dof << ',' << r.nstar << ',' << csv_cell(r.energy) << ','
       << csv_cell(r.residual) << ',' << csv_cell(r.error_h1) << ',' << csv_cell(r.q) << ','
       << (timing ? csv_cell(r.walltime_s) : std::string("0")) << '\n';
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

// least-squares slope of log10(y) against log10(x) over the final entries
inline double tail_slope(const std::vector<double>& x, const std::vector<double>& y,
                         std::size_t tail = 5) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(y[i]) && y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log10(x[i]));
      ly.push_back(std::log10(y[i]));
    }
  if (lx.size() > tail) {
    lx.erase(lx.begin(), lx.end() - tail);
    ly.erase(ly.begin(), ly.end() - tail);
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= lx.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

}  // namespace detail

// Execute one configured run into outdir: records.csv, summary.txt, and one
// VTK file per level when requested.
inline void run(const RunConfig& cfg, const std::filesystem::path& outdir) {
  Problem p = problem_from_config(cfg);
  AdaptiveParams prm = params_from_config(cfg, p);

  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec || !std::filesystem::is_directory(outdir))
    throw IoError("cannot create output directory '" + outdir.string() + "'");

  double e_ref = std::numeric_limits<double>::quiet_NaN();
  if (cfg.e_ref)
    e_ref = *cfg.e_ref;
  else if (p.exact_solution)
    e_ref = exact_energy(p);

  LevelCallback cb = nullptr;
  if (cfg.vtk)
    cb = [&](const RunRecord& rec, const Mesh& m, const DofMap& dm, const FeFunction& u,
             const IterationResult*) {
      std::ostringstream name;
      name << "solution_" << rec.level << ".vtk";
      write_vtk((outdir / name.str()).string(), m, dm, u);
    };

  AdaptiveResult result = adaptive_solve(p, prm, e_ref, cb);
  detail::write_records_csv(outdir / "records.csv", result.records, cfg.timing);

  std::vector<double> dofs, errs, egaps;
  for (const RunRecord& r : result.records) {
    dofs.push_back(r.dof);
    errs.push_back(r.error_h1);
    egaps.push_back(std::isfinite(e_ref) ? std::abs(r.energy - e_ref)
                                         : std::numeric_limits<double>::quiet_NaN());
  }
  std::ofstream os(outdir / "summary.txt");
  if (!os) throw IoError("cannot write summary.txt");
  const RunRecord& fin = result.records.back();
  os << "experiment " << p.name << '\n';
  os << "levels " << result.records.size() << '\n';
  os << "final_dof " << fin.dof << '\n';
  os << "final_energy " << detail::format_double(fin.energy) << '\n';
  os << "converged " << (result.converged ? "yes" : "no") << '\n';
  os << "error_slope " << detail::format_double(detail::tail_slope(dofs, errs)) << '\n';
  os << "energy_error_slope " << detail::format_double(detail::tail_slope(dofs, egaps)) << '\n';
  if (!os) throw IoError("write failed for summary.txt");
}

// Reference energy: run the same configuration out to target_dof and return
// the final level's energy. Results are cached as flat files keyed by every
// parameter that affects the trajectory, so repeated calls are bit-identical.
inline double reference_energy(const RunConfig& cfg, double target_dof,
                               const std::filesystem::path& cache_dir) {
  Problem p = problem_from_config(cfg);
  AdaptiveParams prm = params_from_config(cfg, p);
  double run_max = prm.max_dof > 0.0 ? prm.max_dof : p.max_dof_default;
  if (!(target_dof >= run_max))
    throw ConfigError("reference_energy: target_dof must be at least the run's max_dof");

  std::ostringstream key;
  key << "ref_" << p.name << "_eps" << detail::format_double(p.epsilon) << "_a"
      << detail::format_double(prm.alpha) << "_t" << detail::format_double(prm.theta) << "_dt"
      << detail::format_double(prm.dt > 0.0 ? prm.dt : p.dt_default) << "_n"
      << (prm.initial_n > 0 ? prm.initial_n : p.initial_n_default) << "_q" << prm.quad_order
      << (prm.decay == DecayMode::exact ? "_exact" : "_approx") << (prm.direct ? "_direct" : "")
      << "_d" << detail::format_double(target_dof) << ".txt";

  std::filesystem::path cache_file;
  if (!cache_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    cache_file = cache_dir / key.str();
    std::ifstream is(cache_file);
    if (is) {
      double v = 0.0;
      if (is >> v) return v;
      throw IoError("corrupt cache file '" + cache_file.string() + "'");
    }
  }

  prm.max_dof = target_dof;
  AdaptiveResult result = adaptive_solve(p, prm);
  double e = result.records.back().energy;
  if (!cache_file.empty()) {
    std::ofstream os(cache_file);
    if (!os) throw IoError("cannot write cache file '" + cache_file.string() + "'");
    os << detail::format_double(e) << '\n';
  }
  return e;
}

}  // namespace semfem
