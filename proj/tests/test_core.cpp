#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "geoflux/core.hpp"
#include "instances.hpp"

using namespace geoflux;
using fixtures::P;

TEST_CASE("balanced pair validates") {
  const auto r = validate_problem(fixtures::single_pair());
  CHECK(r.ok());
}

TEST_CASE("imbalance is reported with the net flux") {
  const auto r = validate_problem(fixtures::euclidean({P(0, 0), P(1, 0)}, {1, -0.5}));
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0] == "net flux = 0.5");
}

TEST_CASE("sources and sinks follow the flux signs") {
  const auto spec = fixtures::euclidean({P(0, 0), P(1, 0), P(0, 1)}, {1, 1, -2});
  CHECK(validate_problem(spec).ok());
  const Problem p(spec);
  CHECK(p.sources() == std::vector<int>{0, 1});
  CHECK(p.sinks() == std::vector<int>{2});
  CHECK(p.total_outflow() == 2.0);
}

TEST_CASE("validation lists every violation without throwing") {
  auto spec = fixtures::euclidean({P(0, 0), P(0, 0), P(1, 1)}, {1, 1, 1});
  spec.domain_box = Box{P(0.5, 0.5), P(2, 2)};
  const auto r = validate_problem(spec);
  CHECK_FALSE(r.ok());
  auto has = [&](const std::string& s) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const std::string& v) { return v.find(s) != std::string::npos; });
  };
  CHECK(has("duplicate points 0 and 1"));
  CHECK(has("net flux = 3"));
  CHECK(has("no sinks"));
  CHECK(has("outside the domain box"));
  CHECK_THROWS_AS(Problem{spec}, Error);
}

TEST_CASE("net flux tolerance is relative to the largest flux") {
  CHECK(validate_problem(fixtures::euclidean({P(0, 0), P(1, 0)}, {1e6, -1e6 + 5e-7})).ok());
  CHECK_FALSE(validate_problem(fixtures::euclidean({P(0, 0), P(1, 0)}, {1e6, -1e6 + 5e-6})).ok());
  CHECK(validate_problem(fixtures::euclidean({P(0, 0), P(1, 0)}, {1e-9, -1e-9})).ok());
}

TEST_CASE("grid mode needs planar points, analytic mode needs V = 0") {
  Point a(3), b(3);
  a << 0, 0, 0;
  b << 1, 1, 1;
  auto spec = fixtures::euclidean({a, b}, {1, -1});
  CHECK(validate_problem(spec).ok());  // analytic mode takes any dimension
  spec.mode = GeodesicMode::Grid;
  CHECK_FALSE(validate_problem(spec).ok());

  auto bumped = fixtures::b1();
  bumped.mode = GeodesicMode::Analytic;
  CHECK_FALSE(validate_problem(bumped).ok());
}

TEST_CASE("potential values") {
  CHECK(eval_potential(Potential::zero(), P(3, -2)) == 0.0);
  const auto v = Potential::gaussian_sum({{P(0, 0), 1.0, 0.5}});
  CHECK(eval_potential(v, P(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_potential(v, P(0.5, 0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("potential gradient matches central differences") {
  const auto v = Potential::gaussian_sum({{P(0.3, 0.1), 0.8, 0.25}, {P(0.7, -0.1), 0.6, 0.2}});
  const Eigen::Vector2d x(0.45, 0.02);
  const Eigen::Vector2d g = v.gradient(x);
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e[k] = h;
    CHECK(g[k] == doctest::Approx((v(x + e) - v(x - e)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("sup of the zero potential is 0 at the origin") {
  const auto s = potential_sup(Potential::zero());
  CHECK(s.value == 0.0);
  CHECK(s.location.norm() == 0.0);
}

TEST_CASE("sup of a single bump is its peak") {
  const auto s = potential_sup(Potential::gaussian_sum({{P(0.3, -0.7), 2.5, 0.4}}));
  CHECK(s.value == doctest::Approx(2.5).epsilon(1e-12));
  CHECK((s.location - P(0.3, -0.7)).norm() < 1e-6);
}

TEST_CASE("sup of two bumps leans toward the smaller one") {
  const auto s = potential_sup(Potential::gaussian_sum({{P(0, 0), 1.0, 0.5}, {P(2, 0), 0.5, 0.5}}));
  CHECK(std::abs(s.value - fixtures::kTwoBumpSup) <= 1e-9 * fixtures::kTwoBumpSup);
  CHECK(s.location[0] == doctest::Approx(fixtures::kTwoBumpArgmax).epsilon(1e-2));
  CHECK(std::abs(s.location[1]) < 1e-8);
}

TEST_CASE("sup bounds every sampled value") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 2.5), h(0.1, 2.0), w(0.1, 0.8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Bump> b;
    for (int k = 0; k < 3; ++k) b.push_back({P(u(rng), u(rng)), h(rng), w(rng)});
    const auto v = Potential::gaussian_sum(b);
    const auto s = potential_sup(v);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double x = v(P(u(rng), u(rng)));
      CHECK(x >= 0.0);
      CHECK(x <= v.total_height());
      worst = std::max(worst, x);
    }
    CHECK(worst <= s.value + 1e-9);
    CHECK(v(s.location) == doctest::Approx(s.value).epsilon(1e-12));
  }
}

TEST_CASE("auto box is square and padded by the point spread") {
  const auto set = SourceSinkSet{{P(0, 0), P(2, 0.5)}, {1, -1}};
  const Box box = auto_box(set);
  const double pad = std::hypot(2.0, 0.5);
  CHECK((box.hi - box.lo)[0] == doctest::Approx((box.hi - box.lo)[1]));
  for (const auto& p : set.points) CHECK(box.clearance(p) >= pad - 1e-12);
}

TEST_CASE("problem derives sup V and the degenerate window") {
  const Problem p(fixtures::b2());
  CHECK(p.grid_mode());
  CHECK(p.vbar() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.energy_tol() == doctest::Approx(2e-6));
  CHECK(p.lowest_energy() == doctest::Approx(1.0 + 2e-6).epsilon(1e-14));

  auto spec = fixtures::single_pair();
  spec.tolerances.energy_tol = 1e-4;
  const Problem q(spec);
  CHECK_FALSE(q.grid_mode());
  CHECK(q.energy_tol() == 1e-4);
}
