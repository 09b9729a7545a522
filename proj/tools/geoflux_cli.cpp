// geoflux: command-line front end.
//
//   geoflux solve <config> [--out DIR] [--grid-res N] [--tol-* X]
//   geoflux scan-energy <config> --from E --to E --n K [--log]
//   geoflux distances <config> --energy E
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "geoflux/io.hpp"

namespace {

struct Overrides {
  std::optional<std::string> out;
  std::optional<int> grid_res;
  std::optional<double> lp, energy, eikonal, quadrature, bisection, stationarity;
  bool no_orbits = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--out", out, "output directory (overrides output.dir)");
    cmd->add_option("--grid-res", grid_res, "cells per axis")->check(CLI::Range(8, 1 << 15));
    cmd->add_option("--tol-lp", lp, "lp_tol")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-energy", energy, "energy_tol")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-eikonal", eikonal, "eikonal_tol")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-quadrature", quadrature, "quadrature_step")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-bisection", bisection, "bisection_tol")->check(CLI::PositiveNumber);
    cmd->add_option("--tol-stationarity", stationarity, "stationarity_tol")->check(CLI::PositiveNumber);
  }

  void apply(geoflux::RunConfig& cfg) const {
    auto& t = cfg.problem.tolerances;
    if (out) cfg.output_dir = *out;
    if (grid_res) cfg.problem.grid_resolution = *grid_res;
    if (lp) t.lp_tol = *lp;
    if (energy) t.energy_tol = *energy;
    if (eikonal) t.eikonal_tol = *eikonal;
    if (quadrature) t.quadrature_step = *quadrature;
    if (bisection) t.bisection_tol = *bisection;
    if (stationarity) t.stationarity_tol = *stationarity;
  }
};

int exit_code(geoflux::ErrorKind kind) {
  using geoflux::ErrorKind;
  return kind == ErrorKind::Config || kind == ErrorKind::InvalidProblem || kind == ErrorKind::Unsupported ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-action flows between point sources and sinks"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;

  auto* solve = app.add_subcommand("solve", "optimal energy, plan and measure with diagnostics");
  solve->add_option("config", config_path, "TOML run file")->required();
  solve->add_flag("--no-orbits", ov.no_orbits, "skip the orbit shooting checks");
  ov.attach(solve);

  auto* scan = app.add_subcommand("scan-energy", "sample W, g and sum A T over an energy range");
  scan->add_option("config", config_path, "TOML run file")->required();
  std::optional<double> from, to;
  std::optional<int> count;
  bool log_spaced = false;
  scan->add_option("--from", from, "first energy");
  scan->add_option("--to", to, "last energy");
  scan->add_option("--n", count, "number of samples")->check(CLI::Range(1, 100000));
  scan->add_flag("--log", log_spaced, "logarithmic spacing");
  ov.attach(scan);

  auto* dist = app.add_subcommand("distances", "full distance table at one energy");
  dist->add_option("config", config_path, "TOML run file")->required();
  std::optional<double> energy;
  dist->add_option("--energy", energy, "energy level");
  ov.attach(dist);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    geoflux::RunConfig cfg = geoflux::load_config(config_path);
    ov.apply(cfg);
    geoflux::OutputSet out;
    if (solve->parsed()) {
      geoflux::SolveOptions options;
      options.diagnostics.orbits = !ov.no_orbits;
      out = geoflux::run_solve(cfg, options);
    } else if (scan->parsed()) {
      geoflux::ScanRange r = cfg.energy_scan_range.value_or(geoflux::ScanRange{});
      if (from) r.from = *from;
      if (to) r.to = *to;
      if (count) r.count = *count;
      if (log_spaced) r.log_spaced = true;
      if (from || to || count || log_spaced || cfg.energy_scan_range) cfg.energy_scan_range = r;
      if (cfg.energy_scan_range && !(r.to >= r.from))
        throw geoflux::Error(geoflux::ErrorKind::Config, "empty energy range");
      out = geoflux::run_scan_energy(cfg);
    } else {
      if (energy) cfg.energy = *energy;
      out = geoflux::run_distances(cfg);
    }
    for (const auto& path : out.commit(cfg.output_dir)) std::cout << path.string() << "\n";
    return 0;
  } catch (const geoflux::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
