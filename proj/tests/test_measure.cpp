#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "geoflux/measure.hpp"
#include "instances.hpp"

using namespace geoflux;
using fixtures::P;

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct Solved {
  Problem problem;
  EnergySolution solution;
  OptimalMeasure measure;

  explicit Solved(ProblemSpec spec)
      : problem(std::move(spec)), solution(optimize_energy(problem)), measure(assemble_measure(problem, solution)) {}
};

}  // namespace

TEST_CASE("density is uniform under V = 0") {
  const Problem p(fixtures::euclidean({P(0, 0), P(2, 0)}, {1, -1}));
  const auto path = geodesic(p, 0, 1, 0.7);
  const auto d = build_density(p.potential(), path, 0.7);
  CHECK((d.rho.array() - 0.5).abs().maxCoeff() < 1e-12);
  CHECK(d.raw_integral == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.s[d.s.size() - 1] == doctest::Approx(2.0));
}

TEST_CASE("density is larger where the potential is higher") {
  const Problem p(fixtures::b1());
  const auto path = geodesic(p, 0, 1, 1.5);
  const auto d = build_density(p.potential(), path, 1.5);
  CHECK(std::abs(d.raw_integral - 1.0) < 0.01);
  Eigen::Index peak = 0;
  d.rho.maxCoeff(&peak);
  // the slowest point lies near the bump, not at the ends
  CHECK(d.s[peak] > 0.3);
  CHECK(d.s[peak] < 0.7);
  CHECK(d.rho[peak] > d.rho[0]);
  CHECK_THROWS_AS(build_density(p.potential(), path, 0.9), Error);
}

TEST_CASE("single pair measure") {
  const Solved s(fixtures::single_pair());
  REQUIRE(s.measure.arcs.size() == 1);
  const auto& arc = s.measure.arcs[0];
  CHECK(arc.weight == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(arc.time == doctest::Approx(kSqrt2).epsilon(1e-8));
  CHECK_FALSE(s.measure.point_mass.has_value());
  CHECK(s.measure.beta() == 0.0);
  CHECK(s.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(action_direct(s.measure) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(action_quadrature(s.measure) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(time_flux_expectation(s.measure) == doctest::Approx(1 / kSqrt2).epsilon(1e-12));
}

TEST_CASE("zero-weight pairs carry no arc") {
  const Solved s(fixtures::euclidean({P(0, 0), P(10, 0), P(0, 1), P(10, 1)}, {1, 1, -1, -1}));
  REQUIRE(s.measure.arcs.size() == 2);
  for (const auto& a : s.measure.arcs) CHECK(std::abs(a.source - a.sink) == 2);
  CHECK(action_direct(s.measure) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("small flux measure puts almost everything on the point mass") {
  const Solved s(fixtures::small_flux(128));
  REQUIRE(s.measure.point_mass.has_value());
  REQUIRE(s.measure.arcs.size() == 1);
  const double t = s.measure.arcs[0].time;
  CHECK(s.measure.beta() == doctest::Approx(1 - 1e-3 * t / kSqrt2).epsilon(1e-12));
  CHECK(s.measure.beta() > 0.99);
  CHECK(s.measure.beta() < 1.0);
  CHECK(std::abs(s.measure.total_mass() - 1) <= 1e-9);
  CHECK((s.measure.point_mass->location - s.problem.vbar_location()).norm() == 0.0);
  CHECK(time_flux_expectation(s.measure) == doctest::Approx(1e-3 / kSqrt2).epsilon(1e-12));
  CHECK(action_direct(s.measure) == doctest::Approx(s.solution.J).epsilon(1e-3));
}

TEST_CASE("bump measure identities") {
  const Solved s(fixtures::b4(2));
  CHECK(std::abs(s.measure.total_mass() - 1) <= 1e-6);
  CHECK(std::abs(time_flux_expectation(s.measure) - 4 / kSqrt2) <= 1e-12);
  CHECK(std::abs(action_direct(s.measure) - s.solution.J) <= 1e-3 * std::abs(s.solution.J));
  CHECK(std::abs(action_quadrature(s.measure) - s.solution.J) <= 1e-2 * std::abs(s.solution.J));
  CHECK(s.measure.density_defect() < 0.01);
}

TEST_CASE("dual function closed forms") {
  const Problem p(fixtures::single_pair());
  CHECK(evaluate_hbar(p, Eigen::Vector2d(1, 0)) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(evaluate_hbar(p, Eigen::Vector2d(3, 3)) == 0.0);
  CHECK(evaluate_hbar(p, Eigen::Vector2d(0, 2)) == doctest::Approx(2.0).epsilon(1e-8));

  const Problem q(fixtures::b2(1, 64));
  CHECK(evaluate_hbar(q, Eigen::Vector2d(0.5, 0.5)) == q.vbar());
}

TEST_CASE("dual function is midpoint convex") {
  const Problem p(fixtures::euclidean({P(0, 0), P(1, 0), P(0.4, 0.8), P(1.3, 1.1)}, {1, 1, -1, -1}));
  DualFunction hbar(p);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) a[i] = g(rng), b[i] = g(rng);
    CHECK(hbar(0.5 * (a + b)) <= 0.5 * (hbar(a) + hbar(b)) + 2 * p.bisection_tol());
  }
}

TEST_CASE("Fenchel attainment at the scaled duals") {
  const Solved s(fixtures::euclidean({P(0, 0), P(1, 0), P(0.4, 0.8)}, {1.5, -1, -0.5}));
  const Eigen::VectorXd phi = kSqrt2 * s.solution.duals.phi;
  const double h = evaluate_hbar(s.problem, phi);
  CHECK(h <= s.solution.energy + 1e-8);
  CHECK(s.problem.flux_vector().dot(phi) - h == doctest::Approx(s.solution.J).epsilon(1e-6));
}

TEST_CASE("quadratic form at the optimal potentials") {
  const Solved s(fixtures::single_pair());
  const double d = s.measure.arcs[0].distance;
  const Eigen::Vector2d zeta(kSqrt2 * d, 0);
  const auto q = eval_H_quadratic(zeta, s.measure, 2);
  CHECK(q.gradient[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(q.gradient[1] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(q.value == doctest::Approx(0.5).epsilon(1e-8));

  const auto flat = eval_H_quadratic(Eigen::Vector2d(0.3, 0.3), s.measure, 2);
  CHECK(flat.value == 0.0);
  CHECK(flat.gradient.norm() == 0.0);
}

TEST_CASE("quadratic form gradient matches finite differences") {
  const Solved s(fixtures::b5(2, 128));
  const int n = s.problem.size();
  Eigen::VectorXd zeta(n);
  zeta << 0.3, -1.2, 0.7;
  const auto q = eval_H_quadratic(zeta, s.measure, n);
  CHECK(q.value > 0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1e-6;
    const double fd = (eval_H_quadratic(zeta + e, s.measure, n).value - eval_H_quadratic(zeta - e, s.measure, n).value) / 2e-6;
    CHECK(std::abs(fd - q.gradient[i]) <= 1e-6);
  }
  // at the scaled duals the gradient is the flux
  const auto opt = eval_H_quadratic(kSqrt2 * s.solution.duals.phi, s.measure, n);
  CHECK((opt.gradient - s.problem.flux_vector()).cwiseAbs().maxCoeff() <= 1e-6);
}
