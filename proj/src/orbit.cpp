#include "geoflux/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace geoflux {

double Orbit::maupertuis_time() const { return std::sqrt(2.0) * flight_time; }

namespace {

struct State {
  Eigen::Vector2d x;
  Eigen::Vector2d v;
};

State rk4(const Potential& pot, const State& s, double dt) {
  const auto acc = [&](const Eigen::Vector2d& x) -> Eigen::Vector2d { return -pot.gradient(x); };
  const Eigen::Vector2d k1x = s.v, k1v = acc(s.x);
  const Eigen::Vector2d k2x = s.v + 0.5 * dt * k1v, k2v = acc(s.x + 0.5 * dt * k1x);
  const Eigen::Vector2d k3x = s.v + 0.5 * dt * k2v, k3v = acc(s.x + 0.5 * dt * k2x);
  const Eigen::Vector2d k4x = s.v + dt * k3v, k4v = acc(s.x + dt * k3x);
  return {s.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

struct Shot {
  Orbit orbit;
  double signed_miss = std::numeric_limits<double>::quiet_NaN();
};

Shot fire(const Problem& problem, int i, int j, double energy, double theta, double dt, double t_max) {
  const auto& pot = problem.potential();
  const Eigen::Vector2d xi(problem.point(i)[0], problem.point(i)[1]);
  const Eigen::Vector2d xj(problem.point(j)[0], problem.point(j)[1]);
  const double speed = std::sqrt(2.0 * (energy - pot(xi)));
  State s{xi, speed * Eigen::Vector2d(std::cos(theta), std::sin(theta))};

  const auto drift = [&](const State& st) {
    return std::abs(0.5 * st.v.squaredNorm() + pot(st.x) - energy) / energy;
  };
  const auto approach = [&](const State& st) { return (st.x - xj).dot(st.v); };

  Shot shot;
  shot.orbit.launch_angle = theta;
  std::vector<Eigen::Vector2d> samples{s.x};
  const auto stride = static_cast<long>(std::max(1.0, std::floor(t_max / dt / 4000.0)));
  double t = 0.0;
  double worst = drift(s);
  double closest = (s.x - xj).norm();
  long step = 0;
  while (t < t_max) {
    const State next = rk4(pot, s, dt);
    worst = std::max(worst, drift(next));
    if (approach(s) < 0.0 && approach(next) >= 0.0) {
      // Closest approach inside this step: bisect on the sub-step length.
      double lo = 0.0, hi = dt;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (approach(rk4(pot, s, mid)) < 0.0) lo = mid; else hi = mid;
      }
      const State end = rk4(pot, s, 0.5 * (lo + hi));
      const Eigen::Vector2d d = xj - end.x;
      const Eigen::Vector2d dir = end.v.normalized();
      samples.push_back(end.x);
      shot.orbit.flight_time = t + 0.5 * (lo + hi);
      shot.orbit.endpoint_error = d.norm();
      shot.signed_miss = dir.x() * d.y() - dir.y() * d.x();
      break;
    }
    s = next;
    t += dt;
    closest = std::min(closest, (s.x - xj).norm());
    if (++step % stride == 0) samples.push_back(s.x);
  }
  if (std::isnan(shot.signed_miss)) {
    shot.orbit.flight_time = t;
    shot.orbit.endpoint_error = closest;
  }
  shot.orbit.energy_drift = worst;
  shot.orbit.trajectory.resize(2, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k)
    shot.orbit.trajectory.col(static_cast<Eigen::Index>(k)) = samples[k];
  return shot;
}

double seed_angle(const GeodesicPath& seed) {
  const Eigen::Index m = seed.polyline.cols();
  if (m < 2) throw Error(ErrorKind::ShootingDiverged, "seed path has no direction");
  const double ds = seed.length / static_cast<double>(m - 1);
  const auto k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(0.03 * seed.length / ds)), 1, m - 1);
  const Eigen::VectorXd d = seed.polyline.col(k) - seed.polyline.col(0);
  return std::atan2(d[1], d[0]);
}

}  // namespace

Orbit integrate_orbit(const Problem& problem, int i, int j, double energy, double theta, double dt) {
  const double chord = (problem.point(j) - problem.point(i)).norm();
  const double slowest = std::sqrt(2.0 * (energy - problem.vbar()));
  const double t_max = 10.0 * chord / std::max(slowest, 1e-3 * std::sqrt(2.0 * energy));
  return fire(problem, i, j, energy, theta, dt, t_max).orbit;
}

Orbit shoot_orbit(const Problem& problem, int i, int j, double energy, const GeodesicPath& seed,
                  const ShootingOptions& options) {
  if (problem.dimension() != 2) throw Error(ErrorKind::Unsupported, "orbit shooting is planar");
  if (!(energy > problem.vbar())) throw Error(ErrorKind::EnergyTooLow, "orbit needs E > sup V");

  const double chord = (problem.point(j) - problem.point(i)).norm();
  const double estimate = seed.time > 0.0 ? seed.time / std::sqrt(2.0) : chord / std::sqrt(2.0 * energy);
  const double dt = options.step_fraction * estimate;
  const double t_max = 6.0 * estimate;
  const double theta0 = seed_angle(seed);
  const double accept = 1e-9 * std::max(1.0, chord);

  int shots = 0;
  const auto miss = [&](double theta) {
    ++shots;
    return fire(problem, i, j, energy, theta, dt, t_max);
  };

  const Shot centre = miss(theta0);
  if (!std::isnan(centre.signed_miss) && std::abs(centre.signed_miss) <= options.miss_tol * std::max(1.0, chord)) {
    Orbit o = centre.orbit;
    o.shots = shots;
    return o;
  }

  for (double w = options.initial_bracket; w <= options.max_bracket; w *= 2.0) {
    const Shot left = miss(theta0 - w);
    const Shot right = miss(theta0 + w);
    const auto straddles = [](const Shot& a, const Shot& b) {
      return !std::isnan(a.signed_miss) && !std::isnan(b.signed_miss) &&
             (a.signed_miss <= 0.0) != (b.signed_miss <= 0.0);
    };
    struct Bracket { double lo, hi; Shot a; };
    std::vector<Bracket> brackets;
    if (straddles(left, centre)) brackets.push_back({theta0 - w, theta0, left});
    if (straddles(centre, right)) brackets.push_back({theta0, theta0 + w, centre});

    for (auto& b : brackets) {
      double lo = b.lo, hi = b.hi;
      Shot at_lo = b.a;
      Shot best = at_lo;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Shot m = miss(mid);
        if (std::isnan(m.signed_miss)) break;
        if (std::abs(m.signed_miss) < std::abs(best.signed_miss) || std::isnan(best.signed_miss)) best = m;
        if (std::abs(m.signed_miss) <= options.miss_tol * std::max(1.0, chord)) break;
        if ((m.signed_miss <= 0.0) == (at_lo.signed_miss <= 0.0)) {
          lo = mid;
          at_lo = m;
        } else {
          hi = mid;
        }
      }
      if (best.orbit.endpoint_error <= accept) {
        best.orbit.shots = shots;
        return best.orbit;
      }
    }
  }
  throw Error(ErrorKind::ShootingDiverged,
              "no launch angle within " + std::to_string(options.max_bracket) + " rad of the seed reaches point " +
                  std::to_string(j));
}

}  // namespace geoflux
