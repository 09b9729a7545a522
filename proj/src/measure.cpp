#include "geoflux/measure.hpp"

#include <cmath>
#include <string>

namespace geoflux {

namespace {

const double kSqrt2 = std::sqrt(2.0);

double trapezoid(const Eigen::VectorXd& s, const Eigen::VectorXd& f) {
  double sum = 0.0;
  for (Eigen::Index k = 1; k < s.size(); ++k) sum += 0.5 * (f[k] + f[k - 1]) * (s[k] - s[k - 1]);
  return sum;
}

}  // namespace

ArcDensity build_density(const Potential& potential, const GeodesicPath& path, double energy) {
  const Eigen::Index m = path.polyline.cols();
  ArcDensity d;
  d.s.resize(m);
  d.rho.resize(m);
  if (m < 2) {
    d.s.setZero();
    d.rho.setZero();
    return d;
  }
  Eigen::VectorXd inv(m);
  d.s[0] = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (k > 0) d.s[k] = d.s[k - 1] + (path.polyline.col(k) - path.polyline.col(k - 1)).norm();
    const double gap = energy - potential(path.polyline.col(k));
    if (!(gap > 0.0))
      throw Error(ErrorKind::SingularDensity, "E - V vanishes at sample " + std::to_string(k) + " of arc " +
                                                  std::to_string(path.from) + "->" + std::to_string(path.to));
    inv[k] = 1.0 / std::sqrt(gap);
  }
  const double T = path.time > 0.0 ? path.time : trapezoid(d.s, inv);
  d.rho = inv / T;
  d.raw_integral = trapezoid(d.s, d.rho);
  d.rho /= d.raw_integral;
  return d;
}

double OptimalMeasure::arc_mass() const {
  double m = 0.0;
  for (const auto& a : arcs) m += a.weight;
  return m;
}

double OptimalMeasure::density_defect() const {
  double worst = 0.0;
  for (const auto& a : arcs) worst = std::max(worst, std::abs(a.density.raw_integral - 1.0));
  return worst;
}

OptimalMeasure assemble_measure(const Problem& problem, const EnergySolution& solution) {
  OptimalMeasure mu;
  mu.kind = solution.kind;
  mu.E0 = solution.energy;
  mu.evaluation_energy = solution.evaluation_energy;
  const auto& plan = solution.plan;
  const auto& level = solution.level;
  if (level.paths.empty()) throw Error(ErrorKind::InvalidProblem, "measure needs the geodesic paths at E0");

  for (std::size_t a = 0; a < plan.sources.size(); ++a) {
    for (std::size_t b = 0; b < plan.sinks.size(); ++b) {
      const double A = plan.A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (!(A > problem.tolerances().lp_tol)) continue;
      ArcMeasure arc;
      arc.source = plan.sources[a];
      arc.sink = plan.sinks[b];
      arc.A = A;
      arc.time = level.times(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      arc.weight = A * arc.time / kSqrt2;
      arc.distance = level.distances(arc.source, arc.sink);
      arc.path = level.path(static_cast<int>(a), static_cast<int>(b));
      arc.density = build_density(problem.potential(), arc.path, mu.evaluation_energy);
      Eigen::VectorXd v(arc.path.polyline.cols());
      for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = problem.potential()(arc.path.polyline.col(k));
      arc.potential_mean = trapezoid(arc.density.s, arc.density.rho.cwiseProduct(v));
      mu.arcs.push_back(std::move(arc));
    }
  }

  const double arc_mass = mu.arc_mass();
  if (mu.kind == EnergyCase::B) {
    mu.point_mass = PointMass{1.0 - arc_mass, problem.vbar_location()};
    mu.point_value = problem.vbar();
  } else if (std::abs(arc_mass - 1.0) > 1e-6) {
    throw Error(ErrorKind::MassDefect, "arc mass " + std::to_string(arc_mass) + " at E0 = " +
                                           std::to_string(mu.E0) + " (stationarity failed upstream)");
  }
  return mu;
}

double action_direct(const OptimalMeasure& mu) {
  double a = 0.0;
  for (const auto& arc : mu.arcs) a += arc.weight * (2.0 * arc.distance / arc.time - mu.evaluation_energy);
  return a - mu.point_value * mu.beta();
}

double action_quadrature(const OptimalMeasure& mu) {
  double a = 0.0;
  for (const auto& arc : mu.arcs) a += arc.weight * (mu.evaluation_energy - 2.0 * arc.potential_mean);
  return a - mu.point_value * mu.beta();
}

double time_flux_expectation(const OptimalMeasure& mu) {
  double sum = 0.0;
  for (const auto& arc : mu.arcs) sum += arc.weight / arc.time;
  return sum;
}

DualFunction::DualFunction(const Problem& problem) : problem_(problem) {}

const Eigen::MatrixXd& DualFunction::table(double energy) {
  auto it = tables_.find(energy);
  if (it == tables_.end()) it = tables_.emplace(energy, compute_level(problem_, energy, false).distances).first;
  return it->second;
}

double DualFunction::slope(const Eigen::VectorXd& phi, double energy) {
  const Eigen::MatrixXd& d = table(energy);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    for (Eigen::Index j = 0; j < phi.size(); ++j)
      if (i != j) worst = std::max(worst, std::abs(phi[i] - phi[j]) / d(i, j));
  return worst;
}

double DualFunction::operator()(const Eigen::VectorXd& phi) {
  double lo = problem_.lowest_energy();
  if (slope(phi, lo) <= kSqrt2) return problem_.vbar();
  double offset = std::max(1.0, problem_.vbar());
  double hi = problem_.vbar() + offset;
  while (slope(phi, hi) > kSqrt2) {
    lo = hi;
    offset *= 2.0;
    hi = problem_.vbar() + offset;
  }
  while (hi - lo > problem_.bisection_tol()) {
    const double mid = 0.5 * (lo + hi);
    if (slope(phi, mid) <= kSqrt2) hi = mid; else lo = mid;
  }
  return hi;
}

double evaluate_hbar(const Problem& problem, const Eigen::VectorXd& phi) { return DualFunction(problem)(phi); }

QuadraticForm eval_H_quadratic(const Eigen::VectorXd& zeta, const OptimalMeasure& mu, int n) {
  QuadraticForm q;
  q.gradient = Eigen::VectorXd::Zero(n);
  for (const auto& arc : mu.arcs) {
    const double diff = zeta[arc.source] - zeta[arc.sink];
    const double k = arc.weight / (arc.distance * arc.time);
    q.value += 0.5 * k * diff * diff + arc.weight * arc.potential_mean;
    q.gradient[arc.source] += k * diff;
    q.gradient[arc.sink] -= k * diff;
  }
  q.value += mu.point_value * mu.beta();
  return q;
}

}  // namespace geoflux
