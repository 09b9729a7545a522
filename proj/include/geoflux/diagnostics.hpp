#pragma once

#include <string>
#include <vector>

#include "geoflux/core.hpp"
#include "geoflux/energy.hpp"
#include "geoflux/measure.hpp"

namespace geoflux {

enum class CheckStatus { Pass, Fail, Skipped };

std::string_view to_string(CheckStatus status);

struct CheckRecord {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::Skipped;
  /// Why a check was skipped or how it failed.
  std::string note;
};

struct DiagnosticsReport {
  /// Sorted by name; every known check appears once.
  std::vector<CheckRecord> checks;
  Tolerances tolerances;

  const CheckRecord& at(const std::string& name) const;
  bool all_passed() const;  // skipped checks do not count against it
};

/// Names of every check, in report order.
const std::vector<std::string>& check_names();

struct DiagnosticsOptions {
  bool orbits = true;
  bool derivative = true;
};

/// Runs every applicable check. Checks that need the measure are skipped when it
/// is absent; nothing throws for a failing identity.
DiagnosticsReport run_full_diagnostics(const Problem& problem, const EnergySolution& solution,
                                       const OptimalMeasure* measure, const DiagnosticsOptions& options = {});

}  // namespace geoflux
