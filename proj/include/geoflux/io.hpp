#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoflux/core.hpp"
#include "geoflux/diagnostics.hpp"
#include "geoflux/energy.hpp"
#include "geoflux/measure.hpp"

namespace geoflux {

struct ScanRange {
  double from = 0.0;
  double to = 0.0;
  int count = 20;
  bool log_spaced = false;
};

/// A TOML run file: the problem plus what to do with it.
struct RunConfig {
  ProblemSpec problem;
  std::string command = "solve";
  std::string output_dir = "out";
  std::optional<ScanRange> energy_scan_range;
  /// Energy for the distances command.
  std::optional<double> energy;
  bool emit_paths = true;
  bool emit_fields = false;
  std::uint64_t random_seed = 0;
};

/// Throws Error{Config} with "<source>:<line>: <field>: <message>".
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// TOML text that parses back to an equal config (numbers at 17 digits).
std::string emit_config(const RunConfig& config);

bool same_config(const RunConfig& a, const RunConfig& b);

/// Full-precision scientific notation used by every CSV.
std::string format_number(double x);

/// Files are staged in memory and committed together: each is written to a
/// temporary name and renamed. If anything fails, every file of the set that
/// was already placed is removed again.
class OutputSet {
 public:
  void add(std::string name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
  /// Returns the paths written.
  std::vector<std::filesystem::path> commit(const std::filesystem::path& dir) const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Scalars, plan, duals and per-arc summaries; the path samples go to arcs.csv.
std::string solution_json(const Problem& problem, const EnergySolution& solution, const OptimalMeasure& measure);
std::string diagnostics_json(const DiagnosticsReport& report);
/// source,sink,k,s,x,y,rho, one row per path sample (only the two ends of each
/// arc unless all_samples).
std::string arcs_csv(const OptimalMeasure& measure, bool all_samples = true);
/// source,sink,A,D,T,weight over I+ x I-.
std::string plan_csv(const Problem& problem, const EnergySolution& solution);
/// E,W,g,sumAT.
std::string scan_csv(const EnergyScan& scan);
/// n x n table with a header comment giving E and the symmetry defect.
std::string distances_csv(const EnergyLevel& level);
/// Row-major grid of arrival values (inf where unreached).
std::string field_csv(const ArrivalField& field);

struct SolveOptions {
  DiagnosticsOptions diagnostics;
};

/// The pipeline behind each CLI command. They return the staged outputs;
/// library errors propagate unchanged.
OutputSet run_solve(const RunConfig& config, const SolveOptions& options = {});
OutputSet run_scan_energy(const RunConfig& config);
OutputSet run_distances(const RunConfig& config);

}  // namespace geoflux
