#include "geoflux/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geoflux {

double polyline_length(const Eigen::MatrixXd& polyline) {
  double s = 0.0;
  for (Eigen::Index k = 1; k < polyline.cols(); ++k) s += (polyline.col(k) - polyline.col(k - 1)).norm();
  return s;
}

Eigen::MatrixXd resample_polyline(const Eigen::MatrixXd& polyline, double max_step) {
  const Eigen::Index m = polyline.cols();
  const double total = polyline_length(polyline);
  if (m < 2 || total == 0.0) return polyline.col(0);

  const auto n = static_cast<Eigen::Index>(std::max(1.0, std::ceil(total / max_step)));
  Eigen::MatrixXd out(polyline.rows(), n + 1);
  out.col(0) = polyline.col(0);
  Eigen::Index seg = 1;
  double seg_start = 0.0;
  double seg_len = (polyline.col(1) - polyline.col(0)).norm();
  for (Eigen::Index k = 1; k < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n);
    while (seg_start + seg_len < s && seg + 1 < m) {
      seg_start += seg_len;
      ++seg;
      seg_len = (polyline.col(seg) - polyline.col(seg - 1)).norm();
    }
    const double t = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
    out.col(k) = polyline.col(seg - 1) + t * (polyline.col(seg) - polyline.col(seg - 1));
  }
  out.col(n) = polyline.col(m - 1);
  return out;
}

double time_of_flight(const Potential& potential, const Eigen::MatrixXd& polyline, double energy) {
  const Eigen::Index m = polyline.cols();
  if (m < 2) return 0.0;
  Eigen::VectorXd inv(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double gap = energy - potential(polyline.col(k));
    if (!(gap > 0.0))
      throw Error(ErrorKind::SingularIntegrand,
                  "E - V(q(s)) = " + std::to_string(gap) + " at sample " + std::to_string(k));
    inv[k] = 1.0 / std::sqrt(gap);
  }
  double t = 0.0;
  for (Eigen::Index k = 1; k < m; ++k)
    t += 0.5 * (inv[k] + inv[k - 1]) * (polyline.col(k) - polyline.col(k - 1)).norm();
  return t;
}

double time_of_flight(const Problem& problem, const GeodesicPath& path, double energy) {
  return time_of_flight(problem.potential(), path.polyline, energy);
}

namespace {

Eigen::Vector2d planar(const Point& p) { return {p[0], p[1]}; }

void require_energy(const Problem& problem, double energy) {
  if (problem.grid_mode()) {
    if (!(energy >= problem.lowest_energy()))
      throw Error(ErrorKind::EnergyTooLow, "E = " + std::to_string(energy) + " is not above sup V");
  } else if (!(energy > 0.0)) {
    throw Error(ErrorKind::EnergyTooLow, "analytic mode needs E > 0");
  }
}

GeodesicPath straight_path(const Problem& problem, int i, int j, double energy) {
  Eigen::MatrixXd ends(problem.dimension(), 2);
  ends.col(0) = problem.point(i);
  ends.col(1) = problem.point(j);
  GeodesicPath path;
  path.from = i;
  path.to = j;
  path.energy = energy;
  path.polyline = resample_polyline(ends, problem.tolerances().quadrature_step);
  path.length = (problem.point(j) - problem.point(i)).norm();
  path.distance = std::sqrt(energy) * path.length;
  path.time = time_of_flight(problem, path, energy);
  return path;
}

}  // namespace

GeodesicPath extract_path(const ArrivalField& field, const Eigen::Vector2d& target, double quadrature_step) {
  GeodesicPath path;
  path.energy = field.energy;
  path.polyline = resample_polyline(descend_to_source(field, target), quadrature_step);
  path.length = polyline_length(path.polyline);
  path.distance = (target - field.source).norm() == 0.0 ? 0.0 : field.at(target);
  path.boundary_contact = field.boundary_contact;
  return path;
}

double distance(const Problem& problem, int i, int j, double energy) {
  require_energy(problem, energy);
  if (i == j) return 0.0;
  if (!problem.grid_mode()) return std::sqrt(energy) * (problem.point(i) - problem.point(j)).norm();
  return solve_eikonal(problem, i, energy).at(planar(problem.point(j)));
}

GeodesicPath geodesic(const Problem& problem, int i, int j, double energy) {
  require_energy(problem, energy);
  if (!problem.grid_mode()) return straight_path(problem, i, j, energy);
  const ArrivalField field = solve_eikonal(problem, i, energy);
  GeodesicPath path = extract_path(field, planar(problem.point(j)), problem.tolerances().quadrature_step);
  path.from = i;
  path.to = j;
  path.time = time_of_flight(problem, path, energy);
  return path;
}

double distance_derivative_check(const Problem& problem, int i, int j, double energy, double step) {
  const double half_t = 0.5 * geodesic(problem, i, j, energy).time;
  const double slope =
      (distance(problem, i, j, energy + step) - distance(problem, i, j, energy - step)) / (2.0 * step);
  return std::abs(slope - half_t) / half_t;
}

EnergyLevel compute_level(const Problem& problem, double energy, bool with_paths) {
  require_energy(problem, energy);
  const int n = problem.size();
  const auto& src = problem.sources();
  const auto& snk = problem.sinks();
  const auto ns = static_cast<Eigen::Index>(src.size());
  const auto nt = static_cast<Eigen::Index>(snk.size());

  EnergyLevel level;
  level.energy = energy;
  level.raw = Eigen::MatrixXd::Zero(n, n);
  level.times = Eigen::MatrixXd::Zero(ns, nt);

  if (!problem.grid_mode()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        level.raw(i, j) = std::sqrt(energy) * (problem.point(i) - problem.point(j)).norm();
    level.distances = level.raw;
    if (with_paths) {
      for (Eigen::Index a = 0; a < ns; ++a)
        for (Eigen::Index b = 0; b < nt; ++b) {
          level.paths.push_back(straight_path(problem, src[a], snk[b], energy));
          level.times(a, b) = level.paths.back().time;
        }
    }
    return level;
  }

  std::vector<ArrivalField> fields;
  fields.reserve(n);
  for (int i = 0; i < n; ++i) {
    fields.push_back(solve_eikonal(problem, i, energy));
    if (fields.back().boundary_contact)
      level.warnings.push_back("BoundaryContact: field from point " + std::to_string(i) +
                               " reaches the box edge below the target level");
    for (int j = 0; j < n; ++j)
      if (j != i) level.raw(i, j) = fields.back().at(planar(problem.point(j)));
  }
  level.distances = 0.5 * (level.raw + level.raw.transpose());

  if (with_paths) {
    const double qs = problem.tolerances().quadrature_step;
    for (Eigen::Index a = 0; a < ns; ++a) {
      for (Eigen::Index b = 0; b < nt; ++b) {
        GeodesicPath p = extract_path(fields[src[a]], planar(problem.point(snk[b])), qs);
        p.from = src[a];
        p.to = snk[b];
        p.distance = level.distances(src[a], snk[b]);
        p.time = time_of_flight(problem, p, energy);
        level.times(a, b) = p.time;
        level.paths.push_back(std::move(p));
      }
    }
  }
  return level;
}

}  // namespace geoflux
