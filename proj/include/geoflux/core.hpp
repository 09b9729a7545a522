#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "geoflux/errors.hpp"

namespace geoflux {

using Point = Eigen::VectorXd;

/// Point sources (positive flux) and sinks (negative flux).
struct SourceSinkSet {
  std::vector<Point> points;
  std::vector<double> flux;

  int size() const { return static_cast<int>(points.size()); }
  int dimension() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  std::vector<int> sources() const;
  std::vector<int> sinks() const;
  /// Sum of the positive fluxes.
  double total_outflow() const;
  double net_flux() const;
};

struct Bump {
  Point center;
  double height = 1.0;
  double width = 1.0;
};

/// V(x) = sum_k height_k * exp(-|x - center_k|^2 / width_k^2). No bumps means V == 0.
struct Potential {
  std::vector<Bump> bumps;

  static Potential zero() { return {}; }
  static Potential gaussian_sum(std::vector<Bump> bumps) { return {std::move(bumps)}; }

  bool is_zero() const { return bumps.empty(); }
  double total_height() const;

  template <typename Derived>
  double operator()(const Eigen::MatrixBase<Derived>& x) const {
    double v = 0.0;
    for (const auto& b : bumps) {
      const double r2 = (x - b.center).squaredNorm();
      v += b.height * std::exp(-r2 / (b.width * b.width));
    }
    return v;
  }

  template <typename Derived>
  Eigen::Matrix<double, Derived::RowsAtCompileTime, 1> gradient(
      const Eigen::MatrixBase<Derived>& x) const {
    Eigen::Matrix<double, Derived::RowsAtCompileTime, 1> g =
        Eigen::Matrix<double, Derived::RowsAtCompileTime, 1>::Zero(x.size());
    for (const auto& b : bumps) {
      const double w2 = b.width * b.width;
      const auto d = (x - b.center).eval();
      g -= (2.0 * b.height / w2) * std::exp(-d.squaredNorm() / w2) * d;
    }
    return g;
  }
};

double eval_potential(const Potential& potential, const Point& x);

struct PotentialMaximum {
  double value = 0.0;
  Point location;
};

/// sup V and a maximizer. For V == 0 the convention is (0, origin).
PotentialMaximum potential_sup(const Potential& potential, int dimension = 2);

/// Axis-aligned box; grid mode requires a square box in two dimensions.
struct Box {
  Point lo;
  Point hi;

  bool contains(const Point& x) const;
  /// Distance from x to the nearest face (negative when outside).
  double clearance(const Point& x) const;
};

enum class GeodesicMode { Auto, Analytic, Grid };

struct Tolerances {
  double lp_tol = 1e-9;
  /// Width of the degenerate window above sup V; defaults to 1e-6 * (sup V + 1).
  std::optional<double> energy_tol;
  double eikonal_tol = 0.01;
  double quadrature_step = 1e-3;
  /// Termination width for the bisections on E (root of the stationarity
  /// residual and the dual function); defaults to 1e-9 * (sup V + 1).
  std::optional<double> bisection_tol;

  // Certification thresholds reported by the diagnostics.
  double derivative_tol = 1e-2;
  double stationarity_tol = 1e-3;
  double mass_tol = 1e-9;
  double time_flux_tol = 1e-12;
  double action_tol_analytic = 1e-9;
  double action_tol_grid = 1e-3;
  double fenchel_tol = 1e-3;
  double gradient_tol = 1e-6;
  double orbit_endpoint_tol = 1e-3;
  double orbit_drift_tol = 1e-6;
  double closed_form_tol = 1e-6;
};

struct ProblemSpec {
  SourceSinkSet sources_sinks;
  Potential potential;
  std::optional<Box> domain_box;
  int grid_resolution = 256;
  Tolerances tolerances;
  double energy_bracket_cap = 1e6;
  GeodesicMode mode = GeodesicMode::Auto;
};

struct ValidationReport {
  std::vector<std::string> violations;
  /// Non-fatal findings, e.g. a user box with less padding than the point spread.
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

/// Violations are returned as data; nothing throws.
ValidationReport validate_problem(const ProblemSpec& spec);

/// Square box around the point cloud padded by the largest pairwise distance.
Box auto_box(const SourceSinkSet& set);

/// Validated, immutable problem with the derived quantities every module needs.
class Problem {
 public:
  /// Throws Error{InvalidProblem} listing every violation.
  explicit Problem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  const SourceSinkSet& points() const { return spec_.sources_sinks; }
  const Potential& potential() const { return spec_.potential; }
  const Tolerances& tolerances() const { return spec_.tolerances; }
  const std::vector<int>& sources() const { return sources_; }
  const std::vector<int>& sinks() const { return sinks_; }
  const Point& point(int i) const { return spec_.sources_sinks.points[i]; }
  double flux(int i) const { return spec_.sources_sinks.flux[i]; }
  int size() const { return spec_.sources_sinks.size(); }
  int dimension() const { return spec_.sources_sinks.dimension(); }

  bool grid_mode() const { return grid_mode_; }
  const Box& box() const { return box_; }
  double vbar() const { return sup_.value; }
  const Point& vbar_location() const { return sup_.location; }
  double energy_tol() const { return energy_tol_; }
  double bisection_tol() const { return bisection_tol_; }
  double total_outflow() const { return spec_.sources_sinks.total_outflow(); }
  Eigen::VectorXd flux_vector() const;

  /// Smallest energy the solver evaluates: sup V + energy_tol.
  double lowest_energy() const { return sup_.value + energy_tol_; }

 private:
  ProblemSpec spec_;
  std::vector<int> sources_;
  std::vector<int> sinks_;
  bool grid_mode_ = false;
  Box box_;
  PotentialMaximum sup_;
  double energy_tol_ = 0.0;
  double bisection_tol_ = 0.0;
};

}  // namespace geoflux
