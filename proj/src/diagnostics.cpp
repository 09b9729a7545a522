#include "geoflux/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "geoflux/orbit.hpp"

namespace geoflux {

namespace {

const double kSqrt2 = std::sqrt(2.0);

CheckRecord graded(std::string name, double residual, double tolerance, std::string note = {}) {
  const bool ok = std::isfinite(residual) && residual <= tolerance;
  return {std::move(name), residual, tolerance, ok ? CheckStatus::Pass : CheckStatus::Fail, std::move(note)};
}

CheckRecord skipped(std::string name, double tolerance, std::string note) {
  return {std::move(name), 0.0, tolerance, CheckStatus::Skipped, std::move(note)};
}

struct Arc {
  int slot_source, slot_sink, i, j;
};

std::vector<Arc> support(const Problem& problem, const TransportPlan& plan) {
  std::vector<Arc> arcs;
  for (auto [a, b] : plan.support(problem.tolerances().lp_tol))
    arcs.push_back({a, b, plan.sources[a], plan.sinks[b]});
  return arcs;
}

}  // namespace

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{"net_flux", "triangle_inequality", "distance_symmetry", "distance_derivative",
                               "lp_duality_gap", "complementary_slackness", "stationarity",
                               "mass_normalization", "time_flux_duality", "action_consistency",
                               "hbar_fenchel", "grad_H_equals_lambda", "orbit_endpoint",
                               "orbit_energy_drift", "euclidean_closed_form"};
    std::sort(v.begin(), v.end());
    return v;
  }();
  return names;
}

const CheckRecord& DiagnosticsReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check named " + name);
}

bool DiagnosticsReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.status == CheckStatus::Fail; });
}

DiagnosticsReport run_full_diagnostics(const Problem& problem, const EnergySolution& sol,
                                       const OptimalMeasure* mu, const DiagnosticsOptions& options) {
  const Tolerances& tol = problem.tolerances();
  const bool grid = problem.grid_mode();
  const Eigen::VectorXd flux = problem.flux_vector();
  const Eigen::MatrixXd& D = sol.level.distances;
  const int n = problem.size();
  const double dmax = D.maxCoeff();
  const auto arcs = support(problem, sol.plan);

  DiagnosticsReport report;
  report.tolerances = tol;
  auto& out = report.checks;

  out.push_back(graded("net_flux", std::abs(flux.sum()), tol.lp_tol));

  double tri = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) tri = std::max(tri, D(a, c) - D(a, b) - D(b, c));
  out.push_back(graded("triangle_inequality", tri, grid ? 3.0 * tol.eikonal_tol * dmax : 1e-12 * std::max(1.0, dmax)));

  double sym = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) sym = std::max(sym, std::abs(sol.level.raw(a, b) - sol.level.raw(b, a)) / D(a, b));
  out.push_back(graded("distance_symmetry", sym, grid ? 2.0 * tol.eikonal_tol : 1e-12));

  if (options.derivative && !arcs.empty()) {
    // Central differences need E - h above the degenerate window; in case B the
    // check moves up just far enough.
    const double e = std::max(sol.evaluation_energy, problem.lowest_energy() / 0.999 * (1.0 + 1e-9));
    double worst = 0.0;
    std::string note;
    try {
      for (const auto& arc : arcs) worst = std::max(worst, distance_derivative_check(problem, arc.i, arc.j, e, 1e-3 * e));
    } catch (const Error& err) {
      worst = std::numeric_limits<double>::infinity();
      note = err.what();
    }
    out.push_back(graded("distance_derivative", worst, tol.derivative_tol, note));
  } else {
    out.push_back(skipped("distance_derivative", tol.derivative_tol, "disabled"));
  }

  const double W = sol.plan.cost;
  out.push_back(graded("lp_duality_gap", std::abs(W - sol.duals.objective(flux)), tol.lp_tol * std::max(1.0, W)));
  out.push_back(graded("complementary_slackness",
                       check_complementary_slackness(sol.plan, sol.duals, sol.cost, tol.lp_tol), tol.lp_tol));

  const double h = sol.sum_AT - kSqrt2;
  out.push_back(graded("stationarity", sol.kind == EnergyCase::A ? std::abs(h) : std::max(0.0, h),
                       tol.stationarity_tol, sol.kind == EnergyCase::A ? "case A" : "case B"));

  if (mu) {
    out.push_back(graded("mass_normalization", std::abs(mu->total_mass() - 1.0), tol.mass_tol));
    out.push_back(graded("time_flux_duality", std::abs(time_flux_expectation(*mu) - problem.total_outflow() / kSqrt2),
                         tol.time_flux_tol));
    const double J = sol.J;
    out.push_back(graded("action_consistency", std::abs(action_direct(*mu) - J) / std::max(1.0, std::abs(J)),
                         grid ? tol.action_tol_grid : tol.action_tol_analytic));

    const Eigen::VectorXd phi = kSqrt2 * sol.duals.phi;
    DualFunction hbar(problem);
    double fenchel;
    std::string note;
    try {
      fenchel = std::abs(flux.dot(phi) - hbar(phi) - J) / std::max(1.0, std::abs(J));
    } catch (const Error& err) {
      fenchel = std::numeric_limits<double>::infinity();
      note = err.what();
    }
    out.push_back(graded("hbar_fenchel", fenchel, tol.fenchel_tol, note));
    const QuadraticForm q = eval_H_quadratic(phi, *mu, n);
    out.push_back(graded("grad_H_equals_lambda", (q.gradient - flux).cwiseAbs().maxCoeff(), tol.gradient_tol));
  } else {
    const double action_tol = grid ? tol.action_tol_grid : tol.action_tol_analytic;
    out.push_back(skipped("mass_normalization", tol.mass_tol, "no measure"));
    out.push_back(skipped("time_flux_duality", tol.time_flux_tol, "no measure"));
    out.push_back(skipped("action_consistency", action_tol, "no measure"));
    out.push_back(skipped("hbar_fenchel", tol.fenchel_tol, "no measure"));
    out.push_back(skipped("grad_H_equals_lambda", tol.gradient_tol, "no measure"));
  }

  if (options.orbits && problem.dimension() == 2 && !arcs.empty() && !sol.level.paths.empty()) {
    double endpoint = 0.0, drift = 0.0;
    std::string note;
    try {
      for (const auto& arc : arcs) {
        const Orbit o = shoot_orbit(problem, arc.i, arc.j, sol.evaluation_energy,
                                    sol.level.path(arc.slot_source, arc.slot_sink));
        endpoint = std::max(endpoint, o.endpoint_error);
        drift = std::max(drift, o.energy_drift);
      }
    } catch (const Error& err) {
      endpoint = drift = std::numeric_limits<double>::infinity();
      note = err.what();
    }
    out.push_back(graded("orbit_endpoint", endpoint, tol.orbit_endpoint_tol, note));
    out.push_back(graded("orbit_energy_drift", drift, tol.orbit_drift_tol, note));
  } else {
    out.push_back(skipped("orbit_endpoint", tol.orbit_endpoint_tol, "disabled or not planar"));
    out.push_back(skipped("orbit_energy_drift", tol.orbit_drift_tol, "disabled or not planar"));
  }

  if (!grid) {
    // W at E is sqrt(E) times the Euclidean W1.
    const double w1 = W / std::sqrt(sol.evaluation_energy);
    const double half_w2 = 0.5 * w1 * w1;
    out.push_back(graded("euclidean_closed_form", std::max(std::abs(sol.energy - half_w2), std::abs(sol.J - half_w2)),
                         tol.closed_form_tol));
  } else {
    out.push_back(skipped("euclidean_closed_form", tol.closed_form_tol, "grid mode"));
  }

  std::sort(out.begin(), out.end(), [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
  return report;
}

}  // namespace geoflux
