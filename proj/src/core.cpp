#include "geoflux/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace geoflux {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::EnergyTooLow: return "EnergyTooLow";
    case ErrorKind::DescentStall: return "DescentStall";
    case ErrorKind::SingularIntegrand: return "SingularIntegrand";
    case ErrorKind::ShootingDiverged: return "ShootingDiverged";
    case ErrorKind::Unbalanced: return "Unbalanced";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::SingularDensity: return "SingularDensity";
    case ErrorKind::MassDefect: return "MassDefect";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

std::vector<int> SourceSinkSet::sources() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (flux[i] > 0.0) out.push_back(i);
  return out;
}

std::vector<int> SourceSinkSet::sinks() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (flux[i] < 0.0) out.push_back(i);
  return out;
}

double SourceSinkSet::total_outflow() const {
  double s = 0.0;
  for (double l : flux)
    if (l > 0.0) s += l;
  return s;
}

double SourceSinkSet::net_flux() const {
  return std::accumulate(flux.begin(), flux.end(), 0.0);
}

double Potential::total_height() const {
  double s = 0.0;
  for (const auto& b : bumps) s += b.height;
  return s;
}

double eval_potential(const Potential& potential, const Point& x) { return potential(x); }

namespace {

// Nelder-Mead maximization; small and self-contained since it only polishes
// grid-scan candidates of a smooth function.
Point nelder_mead_max(const std::function<double(const Point&)>& f, const Point& start, double size) {
  const int k = static_cast<int>(start.size());
  std::vector<Point> simplex(k + 1, start);
  for (int i = 0; i < k; ++i) simplex[i + 1][i] += size;
  std::vector<double> val(k + 1);
  for (int i = 0; i <= k; ++i) val[i] = -f(simplex[i]);

  std::vector<int> order(k + 1);
  for (int iter = 0; iter < 20000; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[k - 1 >= 0 ? k - 1 : 0];

    double diameter = 0.0;
    for (int i = 0; i <= k; ++i) diameter = std::max(diameter, (simplex[i] - simplex[best]).norm());
    if (diameter < 1e-13 * (1.0 + simplex[best].norm()) &&
        std::abs(val[worst] - val[best]) <= 1e-17 * (1.0 + std::abs(val[best])))
      break;

    Point centroid = Point::Zero(k);
    for (int i = 0; i <= k; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= k;

    const Point reflected = centroid + (centroid - simplex[worst]);
    const double fr = -f(reflected);
    if (fr < val[best]) {
      const Point expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = -f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        val[worst] = fe;
      } else {
        simplex[worst] = reflected;
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      simplex[worst] = reflected;
      val[worst] = fr;
    } else {
      const Point contracted = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = -f(contracted);
      if (fc < val[worst]) {
        simplex[worst] = contracted;
        val[worst] = fc;
      } else {
        for (int i = 0; i <= k; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          val[i] = -f(simplex[i]);
        }
      }
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  return simplex[static_cast<std::size_t>(it - val.begin())];
}

bool lexicographically_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

PotentialMaximum potential_sup(const Potential& potential, int dimension) {
  if (potential.is_zero()) return {0.0, Point::Zero(dimension)};

  const int k = static_cast<int>(potential.bumps.front().center.size());
  double max_width = 0.0;
  double min_width = std::numeric_limits<double>::infinity();
  Point lo = potential.bumps.front().center;
  Point hi = lo;
  for (const auto& b : potential.bumps) {
    max_width = std::max(max_width, b.width);
    min_width = std::min(min_width, b.width);
    lo = lo.cwiseMin(b.center);
    hi = hi.cwiseMax(b.center);
  }

  std::vector<Point> candidates;
  for (const auto& b : potential.bumps) candidates.push_back(b.center);

  if (k == 2) {
    // Scan of the centre hull inflated by 3 widths; keep the best node.
    lo.array() -= 3.0 * max_width;
    hi.array() += 3.0 * max_width;
    const double step = min_width / 20.0;
    const int nx = static_cast<int>(std::ceil((hi[0] - lo[0]) / step)) + 1;
    const int ny = static_cast<int>(std::ceil((hi[1] - lo[1]) / step)) + 1;
    Point best(2);
    double best_v = -1.0;
    Point x(2);
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        x << lo[0] + i * step, lo[1] + j * step;
        const double v = potential(x);
        if (v > best_v) {
          best_v = v;
          best = x;
        }
      }
    }
    candidates.push_back(best);
  }

  PotentialMaximum out{-1.0, Point()};
  const auto f = [&](const Point& p) { return potential(p); };
  for (const auto& c : candidates) {
    const Point p = nelder_mead_max(f, c, 0.1 * min_width);
    const double v = potential(p);
    const double tie = 1e-12 * std::max(1.0, std::abs(v));
    if (v > out.value + tie ||
        (std::abs(v - out.value) <= tie && lexicographically_less(p, out.location))) {
      out = {v, p};
    }
  }
  return out;
}

bool Box::contains(const Point& x) const {
  return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

double Box::clearance(const Point& x) const {
  return std::min((x - lo).minCoeff(), (hi - x).minCoeff());
}

namespace {

double largest_pairwise_distance(const SourceSinkSet& set) {
  double d = 0.0;
  for (int i = 0; i < set.size(); ++i)
    for (int j = i + 1; j < set.size(); ++j) d = std::max(d, (set.points[i] - set.points[j]).norm());
  return d;
}

bool wants_grid(const ProblemSpec& spec) {
  switch (spec.mode) {
    case GeodesicMode::Analytic: return false;
    case GeodesicMode::Grid: return true;
    case GeodesicMode::Auto: return !spec.potential.is_zero();
  }
  return true;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Box auto_box(const SourceSinkSet& set) {
  Point lo = set.points.front();
  Point hi = lo;
  for (const auto& p : set.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double pad = largest_pairwise_distance(set);
  lo.array() -= pad;
  hi.array() += pad;
  const Point centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo).maxCoeff();
  return {(centre.array() - half).matrix(), (centre.array() + half).matrix()};
}

ValidationReport validate_problem(const ProblemSpec& spec) {
  ValidationReport report;
  auto& v = report.violations;
  const auto& set = spec.sources_sinks;

  if (set.points.size() != set.flux.size()) {
    v.push_back("points and fluxes differ in length (" + std::to_string(set.points.size()) + " vs " +
                std::to_string(set.flux.size()) + ")");
    return report;
  }
  if (set.size() < 2) {
    v.push_back("at least one source and one sink are required");
    return report;
  }

  const int k = set.dimension();
  for (int i = 0; i < set.size(); ++i) {
    const auto& p = set.points[i];
    if (p.size() != k || k == 0)
      v.push_back("point " + std::to_string(i) + " has dimension " + std::to_string(p.size()));
    else if (!p.allFinite())
      v.push_back("point " + std::to_string(i) + " has a non-finite coordinate");
    if (!std::isfinite(set.flux[i]) || set.flux[i] == 0.0)
      v.push_back("flux " + std::to_string(i) + " must be finite and nonzero");
  }
  if (!v.empty()) return report;

  for (int i = 0; i < set.size(); ++i)
    for (int j = i + 1; j < set.size(); ++j)
      if (set.points[i] == set.points[j])
        v.push_back("duplicate points " + std::to_string(i) + " and " + std::to_string(j));

  double max_abs = 0.0;
  for (double l : set.flux) max_abs = std::max(max_abs, std::abs(l));
  const double net = set.net_flux();
  if (std::abs(net) > 1e-12 * max_abs) v.push_back("net flux = " + fmt(net));
  if (set.sources().empty()) v.push_back("no sources (I+ is empty)");
  if (set.sinks().empty()) v.push_back("no sinks (I- is empty)");

  for (std::size_t b = 0; b < spec.potential.bumps.size(); ++b) {
    const auto& bump = spec.potential.bumps[b];
    if (bump.center.size() != k) v.push_back("bump " + std::to_string(b) + " has wrong dimension");
    if (!(bump.height > 0.0) || !(bump.width > 0.0))
      v.push_back("bump " + std::to_string(b) + " needs positive height and width");
  }

  const bool grid = wants_grid(spec);
  if (grid && k != 2) v.push_back("grid mode requires two-dimensional points, got k=" + std::to_string(k));
  if (spec.mode == GeodesicMode::Analytic && !spec.potential.is_zero())
    v.push_back("analytic mode requires the zero potential");
  if (spec.grid_resolution < 8) v.push_back("grid_resolution must be at least 8");

  const auto& t = spec.tolerances;
  if (!(t.lp_tol > 0.0) || !(t.eikonal_tol > 0.0) || !(t.quadrature_step > 0.0))
    v.push_back("tolerances must be positive");
  if (t.energy_tol && !(*t.energy_tol > 0.0)) v.push_back("energy_tol must be positive");
  if (!(spec.energy_bracket_cap > 0.0)) v.push_back("energy_bracket_cap must be positive");

  if (spec.domain_box) {
    const auto& box = *spec.domain_box;
    if (box.lo.size() != k || box.hi.size() != k || !(box.hi.array() > box.lo.array()).all()) {
      v.push_back("domain box is malformed");
    } else {
      const double pad = largest_pairwise_distance(set);
      for (int i = 0; i < set.size(); ++i) {
        if (!box.contains(set.points[i]))
          v.push_back("point " + std::to_string(i) + " lies outside the domain box");
        else if (box.clearance(set.points[i]) < pad)
          report.warnings.push_back("point " + std::to_string(i) +
                                    " has less box padding than the largest pairwise distance");
      }
      if (grid && std::abs((box.hi - box.lo)[0] - (box.hi - box.lo)[1]) >
                      1e-12 * (box.hi - box.lo).maxCoeff())
        v.push_back("grid mode requires a square domain box");
    }
  }
  return report;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) {
  const auto report = validate_problem(spec_);
  if (!report.ok()) {
    std::string msg;
    for (const auto& s : report.violations) msg += (msg.empty() ? "" : "; ") + s;
    throw Error(ErrorKind::InvalidProblem, msg);
  }
  sources_ = spec_.sources_sinks.sources();
  sinks_ = spec_.sources_sinks.sinks();
  grid_mode_ = wants_grid(spec_);
  box_ = spec_.domain_box ? *spec_.domain_box : auto_box(spec_.sources_sinks);
  sup_ = potential_sup(spec_.potential, dimension());
  energy_tol_ = spec_.tolerances.energy_tol.value_or(1e-6 * (sup_.value + 1.0));
  bisection_tol_ = spec_.tolerances.bisection_tol.value_or(1e-9 * (sup_.value + 1.0));
}

Eigen::VectorXd Problem::flux_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(spec_.sources_sinks.flux.data(), size());
}

}  // namespace geoflux
