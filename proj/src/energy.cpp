#include "geoflux/energy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

namespace geoflux {

namespace {

const double kSqrt2 = std::sqrt(2.0);

EnergyEvaluation evaluate(const Problem& problem, double energy, bool with_paths) {
  EnergyEvaluation ev;
  ev.energy = energy;
  ev.level = compute_level(problem, energy, with_paths);
  ev.cost = CostMatrix{ev.level.distances, true};
  auto sol = solve_transport(ev.cost, problem.flux_vector(), problem.tolerances().lp_tol);
  ev.plan = std::move(sol.plan);
  ev.duals = std::move(sol.duals);
  ev.W = ev.plan.cost;
  ev.g = kSqrt2 * ev.W - energy;
  ev.sum_AT = with_paths ? plan_time(ev.plan, ev.level.times) : 0.0;
  return ev;
}

bool same_plan(const TransportPlan& a, const TransportPlan& b, double tol) {
  return (a.A - b.A).cwiseAbs().maxCoeff() <= tol;
}

// Memoised objective; the search revisits bracket ends when it finalises.
class Evaluator {
 public:
  explicit Evaluator(const Problem& problem) : problem_(problem) {}

  const EnergyEvaluation& operator()(double energy) {
    auto it = cache_.find(energy);
    if (it == cache_.end()) it = cache_.emplace(energy, evaluate(problem_, energy, true)).first;
    return it->second;
  }

  double h(double energy) { return (*this)(energy).sum_AT - kSqrt2; }

 private:
  const Problem& problem_;
  std::map<double, EnergyEvaluation> cache_;
};

EnergySample sample_of(const EnergyEvaluation& ev) { return {ev.energy, ev.W, ev.g, ev.sum_AT}; }

double golden(const std::function<double(double)>& g, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double gc = g(c), gd = g(d);
  while (hi - lo > tol) {
    if (gc >= gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - inv_phi * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + inv_phi * (hi - lo);
      gd = g(d);
    }
  }
  return 0.5 * (lo + hi);
}

void fill_solution(EnergySolution& out, const EnergyEvaluation& ev) {
  out.evaluation_energy = ev.energy;
  out.plan = ev.plan;
  out.duals = ev.duals;
  out.cost = ev.cost;
  out.level = ev.level;
  out.W = ev.W;
  out.sum_AT = ev.sum_AT;
  for (const auto& w : ev.level.warnings) out.warnings.push_back(w);
}

}  // namespace

double plan_time(const TransportPlan& plan, const Eigen::MatrixXd& times) {
  return plan.A.cwiseProduct(times).sum();
}

EnergyEvaluation objective(const Problem& problem, double energy) { return evaluate(problem, energy, true); }

StationarityResidual stationarity_residual(const Problem& problem, double energy, double delta) {
  if (delta <= 0.0) delta = std::max(1e-6 * energy, 100.0 * problem.bisection_tol());
  const double below = std::max(energy - delta, 0.5 * (energy + problem.lowest_energy()));
  const EnergyEvaluation at = evaluate(problem, energy, true);
  const EnergyEvaluation lo = evaluate(problem, below, false);
  const EnergyEvaluation hi = evaluate(problem, energy + delta, false);

  StationarityResidual r;
  r.h = at.sum_AT - kSqrt2;
  r.h_minus = plan_time(lo.plan, at.level.times) - kSqrt2;
  r.h_plus = plan_time(hi.plan, at.level.times) - kSqrt2;
  r.non_unique = !same_plan(lo.plan, hi.plan, problem.tolerances().lp_tol);
  r.zero_in_hull = std::min(r.h_minus, r.h_plus) <= 0.0 && std::max(r.h_minus, r.h_plus) >= 0.0;
  return r;
}

EnergyScan scan_energy(const Problem& problem, double from, double to, int count, bool log_spaced) {
  if (count < 1 || !(to >= from)) throw Error(ErrorKind::Config, "empty energy range");
  if (problem.grid_mode() ? !(from >= problem.lowest_energy()) : !(from > 0.0))
    throw Error(ErrorKind::EnergyTooLow, "scan range starts at or below sup V");
  if (log_spaced && !(from > 0.0)) throw Error(ErrorKind::Config, "log spacing needs a positive range");
  EnergyScan scan;
  scan.lo = from;
  scan.hi = to;
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    const double e = log_spaced ? from * std::pow(to / from, t) : from + t * (to - from);
    scan.samples.push_back(sample_of(evaluate(problem, e, true)));
  }
  return scan;
}

double golden_section_max(const Problem& problem, double lo, double hi, double tol) {
  return golden([&](double e) { return evaluate(problem, e, false).g; }, lo, hi, tol);
}

EnergySolution optimize_energy(const Problem& problem, EnergySearch search) {
  Evaluator eval(problem);
  EnergySolution out;
  const double vbar = problem.vbar();
  const double lo = problem.lowest_energy();
  const double tol = problem.bisection_tol();

  const EnergyEvaluation& bottom = eval(lo);
  out.scan.samples.push_back(sample_of(bottom));
  if (bottom.sum_AT - kSqrt2 <= 0.0) {
    // h <= 0 at the bottom: g is maximised at sup V (approached from above).
    out.kind = EnergyCase::B;
    out.energy = vbar;
    fill_solution(out, bottom);
    out.J = kSqrt2 * out.W - vbar;
    out.scan.lo = out.scan.hi = lo;
    return out;
  }

  // Double the offset above sup V until h < 0 and g has turned over.
  double a = lo;
  double prev_g = bottom.g;
  double offset = 0.5 * std::max(1.0, vbar);
  double b = vbar + offset;
  bool monotone = true;
  double last_h = bottom.sum_AT - kSqrt2;
  for (;;) {
    if (b > problem.spec().energy_bracket_cap)
      throw Error(ErrorKind::BracketFailure,
                  "g did not turn over below energy_bracket_cap = " + std::to_string(problem.spec().energy_bracket_cap));
    const EnergyEvaluation& ev = eval(b);
    out.scan.samples.push_back(sample_of(ev));
    const double hb = ev.sum_AT - kSqrt2;
    if (hb > last_h) monotone = false;
    last_h = hb;
    if (hb < 0.0 && ev.g < prev_g) break;
    if (hb > 0.0) a = b;
    prev_g = ev.g;
    offset *= 2.0;
    b = vbar + offset;
  }
  out.scan.lo = lo;
  out.scan.hi = b;

  const bool use_golden = search == EnergySearch::Golden || (search == EnergySearch::Auto && !monotone);
  out.kind = EnergyCase::A;
  if (use_golden) {
    out.used_golden = true;
    const double e0 = golden([&](double e) { return eval(e).g; }, lo, b, tol);
    out.energy = e0;
    fill_solution(out, eval(e0));
    out.J = kSqrt2 * out.W - e0;
    if (e0 - lo <= problem.energy_tol()) {
      out.kind = EnergyCase::B;
      out.energy = vbar;
      out.J = kSqrt2 * out.W - vbar;
    }
    return out;
  }

  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (eval.h(mid) > 0.0) a = mid; else b = mid;
  }
  const double e0 = 0.5 * (a + b);
  const EnergyEvaluation& at = eval(e0);
  out.energy = e0;
  fill_solution(out, at);

  // One-sided plans weighted by T(E0); mixing them restores sum A T = sqrt(2)
  // when the optimal plan switches at E0.
  const EnergyEvaluation& below = eval(a);
  const EnergyEvaluation& above = eval(b);
  const double hm = plan_time(below.plan, at.level.times) - kSqrt2;
  const double hp = plan_time(above.plan, at.level.times) - kSqrt2;
  if (!same_plan(below.plan, above.plan, problem.tolerances().lp_tol) && hm >= 0.0 && hp <= 0.0 && hm > hp) {
    const double alpha = -hp / (hm - hp);
    out.alpha = alpha;
    out.mixed = true;
    out.plan.A = alpha * below.plan.A + (1.0 - alpha) * above.plan.A;
    out.plan.basis.clear();
    out.plan.cost = plan_cost(out.plan, out.cost);
    out.W = out.plan.cost;
    out.sum_AT = plan_time(out.plan, at.level.times);
  }
  out.J = kSqrt2 * out.W - e0;
  return out;
}

}  // namespace geoflux
