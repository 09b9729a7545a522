#pragma once

#include <Eigen/Dense>

#include <vector>

#include "geoflux/core.hpp"
#include "geoflux/geodesic.hpp"
#include "geoflux/transport.hpp"

namespace geoflux {

/// g(E) = sqrt(2) W_E - E together with the plan that attains W_E.
struct EnergyEvaluation {
  double energy = 0.0;
  double W = 0.0;
  double g = 0.0;
  /// sum_ij A_ij T_ij(E).
  double sum_AT = 0.0;
  TransportPlan plan;
  DualPotentials duals;
  CostMatrix cost;
  EnergyLevel level;
};

EnergyEvaluation objective(const Problem& problem, double energy);

/// sum_ij A_ij T_ij for a plan against a (sources x sinks) time table.
double plan_time(const TransportPlan& plan, const Eigen::MatrixXd& times);

struct StationarityResidual {
  /// h(E) = sum A T - sqrt(2) with the plan returned by objective().
  double h = 0.0;
  /// Same residual with the plans optimal at E - delta and E + delta, both
  /// weighted by the times at E.
  double h_minus = 0.0;
  double h_plus = 0.0;
  /// The one-sided plans differ.
  bool non_unique = false;
  /// 0 lies in [min(h_minus, h_plus), max(h_minus, h_plus)].
  bool zero_in_hull = false;
};

StationarityResidual stationarity_residual(const Problem& problem, double energy, double delta = 0.0);

struct EnergySample {
  double energy;
  double W;
  double g;
  double sum_AT;
};

struct EnergyScan {
  std::vector<EnergySample> samples;
  double lo = 0.0;
  double hi = 0.0;
};

/// Uniform (or logarithmic) samples of the objective over [from, to].
EnergyScan scan_energy(const Problem& problem, double from, double to, int count, bool log_spaced = false);

enum class EnergyCase { A, B };

enum class EnergySearch { Auto, Bisection, Golden };

struct EnergySolution {
  EnergyCase kind = EnergyCase::A;
  /// The maximiser E0 (sup V in case B).
  double energy = 0.0;
  /// Energy at which plan, paths and times were evaluated; equals E0 in
  /// case A and sup V + energy_tol in case B.
  double evaluation_energy = 0.0;
  double J = 0.0;
  double W = 0.0;
  double sum_AT = 0.0;
  /// Weight on the plan from below when two one-sided plans were mixed.
  double alpha = 1.0;
  bool mixed = false;
  bool used_golden = false;
  TransportPlan plan;
  DualPotentials duals;
  CostMatrix cost;
  EnergyLevel level;
  EnergyScan scan;
  std::vector<std::string> warnings;
};

/// Maximises sqrt(2) W_E - E over E >= sup V. Brackets by doubling, decides
/// case B when h(sup V + energy_tol) <= 0, and otherwise bisects on h, falling
/// back to golden section on g when h is not monotone along the bracket.
/// Throws BracketFailure when the doubling passes energy_bracket_cap.
EnergySolution optimize_energy(const Problem& problem, EnergySearch search = EnergySearch::Auto);

/// Golden-section maximisation of g on [lo, hi]; returns the maximiser.
double golden_section_max(const Problem& problem, double lo, double hi, double tol);

}  // namespace geoflux
