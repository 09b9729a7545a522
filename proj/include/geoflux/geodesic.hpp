#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "geoflux/core.hpp"
#include "geoflux/eikonal.hpp"

namespace geoflux {

/// An E-geodesic between problem points `from` and `to`.
struct GeodesicPath {
  int from = -1;
  int to = -1;
  /// k x m samples in Euclidean arc-length order, uniformly spaced.
  Eigen::MatrixXd polyline;
  double length = 0.0;    // S
  double distance = 0.0;  // D_E
  double time = 0.0;      // T = int (E - V)^(-1/2) ds
  double energy = 0.0;
  bool boundary_contact = false;

  Point start() const { return polyline.col(0); }
  Point end() const { return polyline.col(polyline.cols() - 1); }
};

double polyline_length(const Eigen::MatrixXd& polyline);

/// Uniform arc-length resampling with spacing <= max_step (endpoints kept).
Eigen::MatrixXd resample_polyline(const Eigen::MatrixXd& polyline, double max_step);

/// Composite trapezoid rule for T over a uniformly sampled polyline.
/// Throws SingularIntegrand if E - V <= 0 at a sample.
double time_of_flight(const Potential& potential, const Eigen::MatrixXd& polyline, double energy);
double time_of_flight(const Problem& problem, const GeodesicPath& path, double energy);

/// D_E(x_i, x_j). Analytic mode returns sqrt(E) |x_i - x_j|; grid mode reads
/// the field marched from x_i at x_j.
double distance(const Problem& problem, int i, int j, double energy);

/// Geodesic from x_i to x_j with S, D and T filled in.
GeodesicPath geodesic(const Problem& problem, int i, int j, double energy);

/// Path from a marched field: steepest descent, then arc-length resampling.
GeodesicPath extract_path(const ArrivalField& field, const Eigen::Vector2d& target, double quadrature_step);

/// |(D_{E+h} - D_{E-h}) / (2h) - T_ij(E)/2| / (T_ij(E)/2).
double distance_derivative_check(const Problem& problem, int i, int j, double energy, double step);

/// Everything geodesic at one energy level.
struct EnergyLevel {
  double energy = 0.0;
  /// raw(i, j): D_E read from the field of x_i at x_j (analytic: exact).
  Eigen::MatrixXd raw;
  /// Symmetrised all-pairs table used as transport cost.
  Eigen::MatrixXd distances;
  /// Source-sink geodesics, row-major over (sources x sinks); empty unless requested.
  std::vector<GeodesicPath> paths;
  /// T over (sources x sinks); zero when paths were not requested.
  Eigen::MatrixXd times;
  std::vector<std::string> warnings;

  const GeodesicPath& path(int source_slot, int sink_slot) const {
    return paths[static_cast<std::size_t>(source_slot * times.cols() + sink_slot)];
  }
};

EnergyLevel compute_level(const Problem& problem, double energy, bool with_paths = true);

}  // namespace geoflux
