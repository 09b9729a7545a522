// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "geoflux/diagnostics.hpp"
#include "geoflux/measure.hpp"
#include "geoflux/orbit.hpp"
#include "instances.hpp"

using namespace geoflux;
using fixtures::P;

namespace {

const double kSqrt2 = std::sqrt(2.0);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Solved {
  std::string label;
  Problem problem;
  EnergySolution solution;
  OptimalMeasure measure;
};

Solved solve(std::string label, ProblemSpec spec) {
  Problem p(std::move(spec));
  EnergySolution s = optimize_energy(p);
  OptimalMeasure mu = assemble_measure(p, s);
  return {std::move(label), std::move(p), std::move(s), std::move(mu)};
}

ProblemSpec random_euclidean(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 6);
  std::uniform_real_distribution<double> u(-2, 2), f(0.2, 2.0);
  const int n = count(rng);
  const int m = std::uniform_int_distribution<int>(1, n - 1)(rng);
  std::vector<Point> pts;
  std::vector<double> flux(n);
  for (int k = 0; k < n; ++k) pts.push_back(P(u(rng), u(rng)));
  double out = 0, in = 0;
  for (int k = 0; k < m; ++k) out += flux[k] = f(rng);
  for (int k = m; k < n; ++k) in += flux[k] = f(rng);
  for (int k = m; k < n; ++k) flux[k] *= -out / in;
  return fixtures::euclidean(pts, flux);
}

// W with unit (Euclidean) cost.
double euclidean_w1(const Problem& p) {
  const int n = p.size();
  CostMatrix c{Eigen::MatrixXd::Zero(n, n), true};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.table(i, j) = (p.point(i) - p.point(j)).norm();
  return solve_transport(c, p.flux_vector(), p.tolerances().lp_tol).plan.cost;
}

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s  [%s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

int main() {
  std::mt19937_64 rng(20261016);

  // Instances shared by several criteria.
  std::vector<Solved> euclid;
  auto t0 = Clock::now();
  for (int k = 0; k < 50; ++k) euclid.push_back(solve("euclidean " + std::to_string(k), random_euclidean(rng)));
  const double euclid_time = seconds_since(t0);

  std::vector<Solved> bumps;
  for (int k = 0; k < 5; ++k) bumps.push_back(solve("bump " + std::to_string(k + 1), fixtures::bump_instance(k, 2)));
  Solved caseb = solve("small flux", fixtures::small_flux());

  std::vector<const Solved*> all;
  for (const auto& s : euclid) all.push_back(&s);
  for (const auto& s : bumps) all.push_back(&s);
  all.push_back(&caseb);

  // 1. closed form for V = 0
  {
    double worst_j = 0, worst_e = 0;
    for (const auto& s : euclid) {
      const double w1 = euclidean_w1(s.problem);
      worst_j = std::max(worst_j, std::abs(s.solution.J - 0.5 * w1 * w1));
      worst_e = std::max(worst_e, std::abs(s.solution.energy - 0.5 * w1 * w1));
    }
    report(1, worst_j <= 1e-9 && worst_e <= 1e-6 && euclid_time < 1.0, "Euclidean closed form, 50 instances",
           fmt("max|J-W^2/2| = %.2e, max|E0-W^2/2| = %.2e, %.3f s", worst_j, worst_e, euclid_time));
  }

  // 2. arcs exactly on the plan support; uniform density when V = 0
  {
    bool support_ok = true;
    double worst_uniform = 0;
    for (const Solved* s : all) {
      const double tol = s->problem.tolerances().lp_tol;
      std::size_t expected = s->solution.plan.support(tol).size();
      support_ok = support_ok && expected == s->measure.arcs.size();
      for (const auto& a : s->measure.arcs) {
        support_ok = support_ok && a.A > tol;
        if (s->problem.potential().is_zero()) {
          const double uniform = 1.0 / a.path.length;
          worst_uniform = std::max(worst_uniform, (a.density.rho.array() - uniform).abs().maxCoeff() / uniform);
        }
      }
    }
    report(2, support_ok && worst_uniform <= 1e-9, "bi-graph support and uniform density",
           fmt("support %s on %zu instances, max density deviation %.2e", support_ok ? "exact" : "MISMATCH",
               all.size(), worst_uniform));
  }

  // 3. dD/dE = T/2 at 512^2
  {
    t0 = Clock::now();
    double worst = 0;
    int pairs = 0;
    const auto& refs = fixtures::bump_references();
    for (int k = 0; k < 5; ++k) {
      const Problem p(fixtures::bump_instance(k, 1, 512));
      const double e = refs[k].energy;
      for (const auto& r : refs[k].pairs) {
        worst = std::max(worst, distance_derivative_check(p, r.source, r.sink, e, 1e-3 * e));
        ++pairs;
      }
    }
    const double t = seconds_since(t0);
    report(3, worst <= 0.01 && t < 60.0, "distance derivative equals T/2, 5 bump instances at 512^2",
           fmt("max relative residual %.2e over %d pairs, %.1f s", worst, pairs, t));
  }

  // 4. stationarity
  {
    double worst_a = 0, worst_b = -1e300;
    int na = 0, nb = 0;
    for (const Solved* s : all) {
      if (s->solution.kind == EnergyCase::A) {
        worst_a = std::max(worst_a, std::abs(s->solution.sum_AT - kSqrt2));
        ++na;
      } else {
        worst_b = std::max(worst_b, s->solution.sum_AT - kSqrt2);
        ++nb;
      }
    }
    report(4, worst_a <= 1e-3 && nb > 0 && worst_b <= 1e-3, "stationarity sum A T = sqrt 2",
           fmt("case A: %d solves, max|h| = %.2e; case B: %d solves, max h = %.2e", na, worst_a, nb, worst_b));
  }

  // 5. time/flux
  {
    double worst = 0;
    for (const Solved* s : all)
      worst = std::max(worst, std::abs(time_flux_expectation(s->measure) - s->problem.total_outflow() / kSqrt2));
    report(5, worst <= 1e-12, "time/flux duality", fmt("max residual %.2e", worst));
  }

  // 6. action
  {
    double worst_analytic = 0, worst_grid = 0;
    for (const Solved* s : all) {
      const double r = std::abs(action_direct(s->measure) - s->solution.J);
      if (s->problem.grid_mode())
        worst_grid = std::max(worst_grid, r / std::abs(s->solution.J));
      else
        worst_analytic = std::max(worst_analytic, r);
    }
    report(6, worst_analytic <= 1e-9 && worst_grid <= 1e-3, "action consistency",
           fmt("analytic max abs %.2e, grid max rel %.2e", worst_analytic, worst_grid));
  }

  // 7. LP against enumeration
  {
    std::uniform_int_distribution<int> size(1, 3);
    std::uniform_real_distribution<double> c(0, 10), f(0.1, 2.0);
    double worst_w = 0, worst_cs = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const int m = size(rng), k = size(rng), n = m + k;
      CostMatrix cost{Eigen::MatrixXd::Zero(n, n)};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) cost.table(i, j) = c(rng);
      Eigen::VectorXd flux(n);
      double out = 0, in = 0;
      for (int i = 0; i < m; ++i) out += flux[i] = f(rng);
      for (int j = m; j < n; ++j) in += flux[j] = f(rng);
      flux.tail(k) *= -out / in;
      const auto s = solve_transport(cost, flux);
      worst_w = std::max(worst_w, std::abs(s.plan.cost - brute_force_transport(cost, flux).cost));
      worst_cs = std::max(worst_cs, check_complementary_slackness(s.plan, s.duals, cost, 1e-9));
    }
    report(7, worst_w <= 1e-9 && worst_cs <= 1e-9, "simplex equals enumeration, 100 instances",
           fmt("max|dW| = %.2e, max slackness residual %.2e", worst_w, worst_cs));
  }

  // 8. geodesics are mechanical orbits
  {
    double worst_end = 0, worst_drift = 0;
    int arcs = 0;
    bool diverged = false;
    for (int k : {0, 2, 4}) {
      const Solved& s = bumps[k];
      for (const auto& a : s.measure.arcs) {
        try {
          const Orbit o = shoot_orbit(s.problem, a.source, a.sink, s.solution.evaluation_energy, a.path);
          worst_end = std::max(worst_end, o.endpoint_error);
          worst_drift = std::max(worst_drift, o.energy_drift);
          ++arcs;
        } catch (const Error&) {
          diverged = true;
        }
      }
    }
    report(8, !diverged && worst_end <= 1e-3 && worst_drift <= 1e-6, "orbit shooting, 3 bump instances",
           fmt("%d arcs, max endpoint miss %.2e, max energy drift %.2e%s", arcs, worst_end, worst_drift,
               diverged ? ", shooting diverged" : ""));
  }

  // 9. case B
  {
    const auto& s = caseb;
    const double beta = s.measure.beta();
    const double mass = std::abs(s.measure.total_mass() - 1.0);
    const double g0 = s.solution.J;
    const double lo = s.problem.lowest_energy();
    // offsets from 1e-4 to 4 above the bottom of the window, log-spaced
    double worst = -1e300;
    for (int k = 0; k < 20; ++k)
      worst = std::max(worst, objective(s.problem, lo + 1e-4 * std::pow(4e4, k / 19.0)).g - g0);
    const bool pass = s.solution.kind == EnergyCase::B && beta > 0.99 && beta < 1.0 && mass <= 1e-9 && worst <= 0;
    report(9, pass, "case B for the small flux",
           fmt("case %s, beta = %.6f, |mass-1| = %.2e, max g(E)-g(sup V+) = %.3e over 20 samples",
               s.solution.kind == EnergyCase::B ? "B" : "A", beta, mass, worst));
  }

  // 10. dual side
  {
    const Problem p(fixtures::euclidean({P(0, 0), P(1, 0), P(0.4, 0.8), P(1.3, 1.1), P(-0.5, 0.9)},
                                        {1, 0.5, -0.7, -0.3, -0.5}));
    DualFunction hbar(p);
    std::normal_distribution<double> g(0, 1);
    double convex = -1e300;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd a(5), b(5);
      for (int i = 0; i < 5; ++i) a[i] = g(rng), b[i] = g(rng);
      convex = std::max(convex, hbar(0.5 * (a + b)) - 0.5 * (hbar(a) + hbar(b)) - 2 * p.bisection_tol());
    }

    double fenchel = 0, grad = 0;
    for (const Solved* s : {&euclid[0], &euclid[1], &bumps[1], &bumps[3]}) {
      const Eigen::VectorXd phi = kSqrt2 * s->solution.duals.phi;
      const Eigen::VectorXd flux = s->problem.flux_vector();
      fenchel = std::max(fenchel, std::abs(flux.dot(phi) - evaluate_hbar(s->problem, phi) - s->solution.J) /
                                      std::max(1.0, std::abs(s->solution.J)));
      const auto q = eval_H_quadratic(phi, s->measure, s->problem.size());
      grad = std::max(grad, (q.gradient - flux).cwiseAbs().maxCoeff());
    }
    report(10, convex <= 0 && fenchel <= 1e-3 && grad <= 1e-6, "dual certification",
           fmt("convexity excess %.2e (100 pairs), Fenchel gap %.2e, |grad H - lambda| %.2e", std::max(convex, 0.0),
               fenchel, grad));
  }

  // 11. first-order convergence of the distances
  {
    const auto& refs = fixtures::bump_references();
    double worst = 1e300;
    std::string ratios;
    for (int k = 0; k < 5; ++k) {
      double e256 = 0, e512 = 0;
      for (int res : {256, 512}) {
        const Problem p(fixtures::bump_instance(k, 1, res));
        const auto level = compute_level(p, refs[k].energy, false);
        double err = 0;
        for (const auto& r : refs[k].pairs) err = std::max(err, std::abs(level.distances(r.source, r.sink) - r.D));
        (res == 256 ? e256 : e512) = err;
      }
      const double ratio = e256 / e512;
      worst = std::min(worst, ratio);
      ratios += fmt("%s%.2f", k ? " " : "", ratio);
    }
    report(11, worst >= 1.7, "grid convergence 256 -> 512 against the 2048 reference",
           "error ratios " + ratios);
  }

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
