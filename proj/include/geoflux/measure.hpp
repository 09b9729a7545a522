#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

#include "geoflux/core.hpp"
#include "geoflux/energy.hpp"
#include "geoflux/geodesic.hpp"

namespace geoflux {

/// rho(s) = 1 / (T sqrt(E - V(q(s)))) sampled at the path's nodes.
struct ArcDensity {
  Eigen::VectorXd s;
  Eigen::VectorXd rho;
  /// Trapezoid integral of rho before renormalisation.
  double raw_integral = 0.0;
};

/// Throws SingularDensity if E - V <= 0 at a sample.
ArcDensity build_density(const Potential& potential, const GeodesicPath& path, double energy);

struct ArcMeasure {
  int source = -1;  // point index
  int sink = -1;
  double A = 0.0;
  double weight = 0.0;    // A T / sqrt(2)
  double time = 0.0;      // T
  double distance = 0.0;  // D from the transport cost table
  GeodesicPath path;
  ArcDensity density;
  /// Trapezoid value of int V rho ds with the normalised density.
  double potential_mean = 0.0;
};

struct PointMass {
  double mass = 0.0;
  Point location;
};

struct OptimalMeasure {
  std::vector<ArcMeasure> arcs;
  std::optional<PointMass> point_mass;
  EnergyCase kind = EnergyCase::A;
  double E0 = 0.0;
  /// Energy of the paths, densities and times.
  double evaluation_energy = 0.0;
  double point_value = 0.0;  // V at the point mass (sup V)

  double arc_mass() const;
  double beta() const { return point_mass ? point_mass->mass : 0.0; }
  double total_mass() const { return arc_mass() + beta(); }
  /// Largest |raw_integral - 1| over the arcs.
  double density_defect() const;
};

/// Arcs for every A_ij > lp_tol, plus the point mass at the maximiser of V in
/// case B. Throws MassDefect when the case A arc mass misses 1 by more than 1e-6.
OptimalMeasure assemble_measure(const Problem& problem, const EnergySolution& solution);

/// sum w (2 D / T - E) - sup V * beta.
double action_direct(const OptimalMeasure& measure);

/// Action by quadrature alone: sum w (E - 2 int V rho) - sup V * beta. Differs
/// from action_direct by the gap between the grid distance and the
/// quadrature of sqrt(E - V) along the extracted path.
double action_quadrature(const OptimalMeasure& measure);

/// sum w / T over the arcs (the point mass carries infinite time).
double time_flux_expectation(const OptimalMeasure& measure);

/// Hbar(phi) = least E >= sup V with max |phi_i - phi_j| / D_E(x_i, x_j) <= sqrt(2),
/// by bisection. Distance tables are cached per energy, so repeated calls on one
/// problem share work.
class DualFunction {
 public:
  explicit DualFunction(const Problem& problem);

  double operator()(const Eigen::VectorXd& phi);
  /// max_{i != j} |phi_i - phi_j| / D_E(i, j).
  double slope(const Eigen::VectorXd& phi, double energy);

 private:
  const Eigen::MatrixXd& table(double energy);

  const Problem& problem_;
  std::map<double, Eigen::MatrixXd> tables_;
};

double evaluate_hbar(const Problem& problem, const Eigen::VectorXd& phi);

struct QuadraticForm {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// H(zeta; mu) = 1/2 sum w (zeta_i - zeta_j)^2 / (D T) + int V dmu.
QuadraticForm eval_H_quadratic(const Eigen::VectorXd& zeta, const OptimalMeasure& measure, int n);

}  // namespace geoflux
