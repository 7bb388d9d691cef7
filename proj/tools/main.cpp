// Experiment runner for the adaptive semilinear solver.
//
//   semfem run <config> -o <outdir>
//   semfem ref-energy <config> --target-dof N [--cache-dir DIR]
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 io error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "semfem/semfem.hpp"

namespace {

semfem::RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw semfem::IoError("cannot read config '" + path + "'");
  return semfem::parse_config(is);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-driven adaptive FEM for semilinear diffusion-reaction problems"};
  app.require_subcommand(1);

  std::string run_config, run_outdir = "out";
  CLI::App* run = app.add_subcommand("run", "execute one configured experiment");
  run->add_option("config", run_config, "configuration file")->required();
  run->add_option("-o,--outdir", run_outdir, "output directory");

  std::string ref_config, ref_cache;
  double ref_target = 0.0;
  CLI::App* ref = app.add_subcommand("ref-energy", "compute a reference energy");
  ref->add_option("config", ref_config, "configuration file")->required();
  ref->add_option("--target-dof", ref_target, "dof budget of the reference run")->required();
  ref->add_option("--cache-dir", ref_cache, "cache directory for reference values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      semfem::run(load_config(run_config), run_outdir);
    } else {
      double e = semfem::reference_energy(load_config(ref_config), ref_target, ref_cache);
      std::cout << semfem::detail::format_double(e) << '\n';
    }
  } catch (const semfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const semfem::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const semfem::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
