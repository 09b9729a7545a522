#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "geoflux/transport.hpp"

using namespace geoflux;

namespace {

// Costs between the points of a plane configuration.
CostMatrix euclidean_costs(const std::vector<Eigen::Vector2d>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  CostMatrix c{Eigen::MatrixXd::Zero(n, n), true};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c.table(i, j) = (pts[i] - pts[j]).norm();
  return c;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double a : v) x[k++] = a;
  return x;
}

struct RandomInstance {
  CostMatrix cost;
  Eigen::VectorXd flux;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 3);
  std::uniform_real_distribution<double> c(0, 10), f(0.1, 2.0);
  const int m = size(rng), k = size(rng), n = m + k;
  RandomInstance r;
  r.cost.table = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) r.cost.table(i, j) = c(rng);
  r.flux.resize(n);
  double out = 0.0, in = 0.0;
  for (int i = 0; i < m; ++i) out += r.flux[i] = f(rng);
  for (int j = m; j < n; ++j) in += -(r.flux[j] = -f(rng));
  r.flux.tail(k) *= out / in;
  return r;
}

}  // namespace

TEST_CASE("forced one-to-one plan") {
  CostMatrix c{Eigen::MatrixXd::Zero(2, 2)};
  c.table(0, 1) = c.table(1, 0) = 0.7;
  const auto s = solve_transport(c, vec({1, -1}));
  CHECK(s.plan.A.rows() == 1);
  CHECK(s.plan.A(0, 0) == doctest::Approx(1.0));
  CHECK(s.plan.cost == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(s.duals.phi[0] - s.duals.phi[1] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(check_complementary_slackness(s.plan, s.duals, c, 1e-9) == 0.0);
}

TEST_CASE("one source filling two sinks") {
  CostMatrix c{Eigen::MatrixXd::Zero(3, 3)};
  c.table(0, 1) = 1;
  c.table(0, 2) = 2;
  const auto s = solve_transport(c, vec({3, -1, -2}));
  CHECK(s.plan.A(0, 0) == doctest::Approx(1.0));
  CHECK(s.plan.A(0, 1) == doctest::Approx(2.0));
  CHECK(s.plan.cost == doctest::Approx(5.0));
  CHECK(s.duals.objective(vec({3, -1, -2})) == doctest::Approx(5.0));
}

TEST_CASE("two by two nearest matching") {
  const auto c = euclidean_costs({{0, 0}, {10, 0}, {0, 1}, {10, 1}});
  const auto flux = vec({1, 1, -1, -1});
  const auto s = solve_transport(c, flux);
  CHECK(s.plan.A.isApprox(Eigen::Matrix2d::Identity()));
  CHECK(s.plan.cost == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(brute_force_transport(c, flux).cost == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(check_complementary_slackness(s.plan, s.duals, c, 1e-9) <= 1e-9);
  CHECK(dual_feasibility_violation(s.duals, c, true) <= 1e-9);

  // The crossed plan is feasible but not optimal: the same duals expose it.
  TransportPlan crossed = s.plan;
  crossed.A << 0, 1, 1, 0;
  CHECK(check_complementary_slackness(crossed, s.duals, c, 1e-9) > 1.0);
}

TEST_CASE("equal costs make every plan optimal") {
  CostMatrix c{Eigen::MatrixXd::Constant(4, 4, 3.0)};
  c.table.diagonal().setZero();
  const auto flux = vec({0.5, 1.5, -1.2, -0.8});
  CHECK(solve_transport(c, flux).plan.cost == doctest::Approx(6.0));
  CHECK(brute_force_transport(c, flux).cost == doctest::Approx(6.0));
}

TEST_CASE("errors") {
  CostMatrix c{Eigen::MatrixXd::Ones(3, 3)};
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Config;
  };
  CHECK(kind([&] { solve_transport(c, vec({1, -0.5, 0})); }) == ErrorKind::Unbalanced);
  CHECK(kind([&] { solve_transport(c, vec({1, 1, 0})); }) == ErrorKind::Unbalanced);
  CostMatrix big{Eigen::MatrixXd::Ones(8, 8)};
  CHECK(kind([&] { brute_force_transport(big, vec({1, 1, 1, 1, -1, -1, -1, -1})); }) == ErrorKind::TooLarge);
}

TEST_CASE("simplex agrees with enumeration on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    const auto r = random_instance(rng);
    const auto s = solve_transport(r.cost, r.flux);
    const auto b = brute_force_transport(r.cost, r.flux);
    CHECK(std::abs(s.plan.cost - b.cost) <= 1e-9);
    CHECK(s.plan.marginal_error(r.flux) <= 1e-9);
    CHECK((s.plan.A.array() >= -1e-12).all());
    CHECK(check_complementary_slackness(s.plan, s.duals, r.cost, 1e-9) <= 1e-9);
    CHECK(dual_feasibility_violation(s.duals, r.cost, false, s.plan.sources, s.plan.sinks) <= 1e-9);
    CHECK(std::abs(s.duals.objective(r.flux) - s.plan.cost) <= 1e-9 * std::max(1.0, s.plan.cost));
  }
}

TEST_CASE("metric costs get duals feasible over every pair") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    for (int k = 0; k < 5; ++k) pts.emplace_back(u(rng), u(rng));
    const auto c = euclidean_costs(pts);
    const auto flux = vec({1.0, 0.5, -0.7, -0.4, -0.4});
    const auto s = solve_transport(c, flux);
    CHECK(dual_feasibility_violation(s.duals, c, true) <= 1e-9);
    CHECK(s.duals.objective(flux) == doctest::Approx(s.plan.cost).epsilon(1e-12));

    // Weak duality: any 1-Lipschitz potential bounds W from below.
    Eigen::VectorXd phi(5);
    for (int k = 0; k < 5; ++k) phi[k] = pts[k].x();
    CHECK(flux.dot(phi) <= s.plan.cost + 1e-12);
  }
}

TEST_CASE("scaling costs scales W and keeps the support optimal") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto r = random_instance(rng);
    const auto s = solve_transport(r.cost, r.flux);
    CostMatrix scaled{3.5 * r.cost.table};
    const auto t = solve_transport(scaled, r.flux);
    CHECK(t.plan.cost == doctest::Approx(3.5 * s.plan.cost).epsilon(1e-12));
    CHECK(plan_cost(s.plan, scaled) == doctest::Approx(t.plan.cost).epsilon(1e-12));
  }
}
