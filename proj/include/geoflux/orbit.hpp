#pragma once

#include <Eigen/Dense>

#include <vector>

#include "geoflux/core.hpp"
#include "geoflux/geodesic.hpp"

namespace geoflux {

/// A mechanical orbit x'' = -grad V launched from x_i at energy E.
struct Orbit {
  /// 2 x m samples of the trajectory up to the closest approach of x_j.
  Eigen::MatrixXd trajectory;
  double launch_angle = 0.0;
  /// Physical flight time. The Maupertuis time T of the geodesic is
  /// sqrt(2) times this value, since the orbit moves at sqrt(2 (E - V)).
  double flight_time = 0.0;
  double endpoint_error = 0.0;
  /// max_t |1/2 |x'|^2 + V - E| / E.
  double energy_drift = 0.0;
  int shots = 0;

  double maupertuis_time() const;
};

struct ShootingOptions {
  /// RK4 step as a fraction of the estimated flight time.
  double step_fraction = 2e-5;
  /// Half-width of the first launch-angle bracket around the seed direction.
  double initial_bracket = 0.05;
  double max_bracket = 1.2;
  double miss_tol = 1e-11;
};

/// Integrates one orbit from x_i with launch angle theta up to its first
/// closest approach of x_j.
Orbit integrate_orbit(const Problem& problem, int i, int j, double energy, double theta, double dt);

/// Shooting on the launch angle, seeded from the initial direction of `seed`.
/// Throws ShootingDiverged when no angle in the widening bracket closes the gap.
Orbit shoot_orbit(const Problem& problem, int i, int j, double energy, const GeodesicPath& seed,
                  const ShootingOptions& options = {});

}  // namespace geoflux
