#include "geoflux/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace geoflux {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of sqrt(E - V) along the segment a -> b, composite Simpson.
double segment_action(const Potential& v, double energy, const Eigen::Vector2d& a,
                      const Eigen::Vector2d& b) {
  constexpr int n = 8;
  const double len = (b - a).norm();
  if (len == 0.0) return 0.0;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const Eigen::Vector2d x = a + (b - a) * (static_cast<double>(k) / n);
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * std::sqrt(std::max(energy - v(x), 0.0));
  }
  return s * len / (3.0 * n);
}

enum class State : std::uint8_t { Far, Trial, Known };

struct HeapEntry {
  double value;
  int index;
  bool operator>(const HeapEntry& o) const {
    return value > o.value || (value == o.value && index > o.index);
  }
};

}  // namespace

Grid2 Grid2::over(const Box& box, int cells) {
  Grid2 g;
  g.origin = Eigen::Vector2d(box.lo[0], box.lo[1]);
  g.spacing = (box.hi[0] - box.lo[0]) / cells;
  g.cells = cells;
  return g;
}

bool Grid2::contains(const Eigen::Vector2d& x) const {
  const double extent = spacing * cells;
  const Eigen::Vector2d r = x - origin;
  const double slack = 1e-12 * extent;
  return r[0] >= -slack && r[1] >= -slack && r[0] <= extent + slack && r[1] <= extent + slack;
}

double ArrivalField::at(const Eigen::Vector2d& x) const {
  const double h = grid.spacing;
  const Eigen::Vector2d r = (x - grid.origin) / h;
  const int n = grid.cells;
  const int i = std::clamp(static_cast<int>(std::floor(r[0])), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(r[1])), 0, n - 1);
  const double tx = std::clamp(r[0] - i, 0.0, 1.0);
  const double ty = std::clamp(r[1] - j, 0.0, 1.0);
  const double u00 = values(i, j), u10 = values(i + 1, j);
  const double u01 = values(i, j + 1), u11 = values(i + 1, j + 1);
  if (!std::isfinite(u00) || !std::isfinite(u10) || !std::isfinite(u01) || !std::isfinite(u11))
    return kInf;
  return (1 - tx) * (1 - ty) * u00 + tx * (1 - ty) * u10 + (1 - tx) * ty * u01 + tx * ty * u11;
}

Eigen::Vector2d ArrivalField::node_gradient(int i, int j) const {
  const int last = grid.cells;
  const double h = grid.spacing;
  const double u = values(i, j);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  auto axis = [&](double lo, double hi) {
    const bool l = std::isfinite(lo), r = std::isfinite(hi);
    if (l && r) return (hi - lo) / (2.0 * h);
    if (r && std::isfinite(u)) return (hi - u) / h;
    if (l && std::isfinite(u)) return (u - lo) / h;
    return 0.0;
  };
  g[0] = axis(i > 0 ? values(i - 1, j) : kInf, i < last ? values(i + 1, j) : kInf);
  g[1] = axis(j > 0 ? values(i, j - 1) : kInf, j < last ? values(i, j + 1) : kInf);
  return g;
}

Eigen::Vector2d ArrivalField::gradient(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d r = (x - grid.origin) / grid.spacing;
  const int n = grid.cells;
  const int i = std::clamp(static_cast<int>(std::floor(r[0])), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(r[1])), 0, n - 1);
  const double tx = std::clamp(r[0] - i, 0.0, 1.0);
  const double ty = std::clamp(r[1] - j, 0.0, 1.0);
  return (1 - tx) * (1 - ty) * node_gradient(i, j) + tx * (1 - ty) * node_gradient(i + 1, j) +
         (1 - tx) * ty * node_gradient(i, j + 1) + tx * ty * node_gradient(i + 1, j + 1);
}

ArrivalField solve_eikonal(const Problem& problem, const Eigen::Vector2d& source, double energy,
                           const std::vector<Eigen::Vector2d>& targets) {
  if (!problem.grid_mode() && problem.dimension() != 2)
    throw Error(ErrorKind::Unsupported, "eikonal grids are planar");
  if (!(energy >= problem.lowest_energy()))
    throw Error(ErrorKind::EnergyTooLow, "E = " + std::to_string(energy) +
                                             " is below sup V + energy_tol = " +
                                             std::to_string(problem.lowest_energy()));

  const Grid2 grid = Grid2::over(problem.box(), problem.spec().grid_resolution);
  if (!grid.contains(source)) throw Error(ErrorKind::InvalidProblem, "eikonal source outside box");

  const int m = grid.nodes();
  const double h = grid.spacing;
  const auto& pot = problem.potential();
  const auto idx = [m](int i, int j) { return i * m + j; };

  std::vector<double> density(static_cast<std::size_t>(m) * m);
  double max_density = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double d = std::sqrt(std::max(energy - pot(grid.node(i, j)), 0.0));
      density[idx(i, j)] = d;
      max_density = std::max(max_density, d);
    }
  }

  std::vector<double> u(density.size(), kInf);
  std::vector<State> state(density.size(), State::Far);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;

  const auto update = [&](int i, int j) {
    const int k = idx(i, j);
    if (state[k] == State::Known) return;
    const auto known = [&](int a, int b) {
      if (a < 0 || b < 0 || a >= m || b >= m) return kInf;
      const int q = idx(a, b);
      return state[q] == State::Known ? u[q] : kInf;
    };
    const double a = std::min(known(i - 1, j), known(i + 1, j));
    const double b = std::min(known(i, j - 1), known(i, j + 1));
    const double fh = density[k] * h;
    double cand;
    if (!std::isfinite(a) && !std::isfinite(b)) return;
    if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a - b) >= fh) {
      cand = std::min(a, b) + fh;
    } else {
      cand = 0.5 * (a + b + std::sqrt(2.0 * fh * fh - (a - b) * (a - b)));
    }
    if (cand < u[k]) {
      u[k] = cand;
      state[k] = State::Trial;
      heap.push({cand, k});
    }
  };

  // Seed: nodes within a fixed fraction of the box (at least two cells) get the
  // straight-line action. A radius that shrinks with h would leave the
  // h log(1/h) point-source error; a fixed one keeps the scheme first order.
  const Eigen::Vector2d rs = (source - grid.origin) / h;
  const int ci = static_cast<int>(std::floor(rs[0]));
  const int cj = static_cast<int>(std::floor(rs[1]));
  std::vector<int> seeded;
  const double radius = std::max(2.0 * h, grid.spacing * grid.cells / 32.0);
  const int reach = static_cast<int>(std::ceil(radius / h)) + 1;
  for (int i = ci - reach; i <= ci + reach + 1; ++i) {
    for (int j = cj - reach; j <= cj + reach + 1; ++j) {
      if (i < 0 || j < 0 || i >= m || j >= m) continue;
      const Eigen::Vector2d x = grid.node(i, j);
      if ((x - source).norm() > radius + 1e-12 * h) continue;
      const int k = idx(i, j);
      u[k] = segment_action(pot, energy, source, x);
      state[k] = State::Known;
      seeded.push_back(k);
    }
  }
  if (seeded.empty()) {
    // Source on a corner of a coarse box: fall back to the enclosing cell.
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) {
        const int i = std::clamp(ci + di, 0, m - 1), j = std::clamp(cj + dj, 0, m - 1);
        const int k = idx(i, j);
        u[k] = segment_action(pot, energy, source, grid.node(i, j));
        state[k] = State::Known;
        seeded.push_back(k);
      }
  }
  for (int k : seeded) {
    const int i = k / m, j = k % m;
    if (i > 0) update(i - 1, j);
    if (i + 1 < m) update(i + 1, j);
    if (j > 0) update(i, j - 1);
    if (j + 1 < m) update(i, j + 1);
  }

  // Nodes of every cell holding a target; the march may stop once all of them
  // are known and the front has moved a few cells beyond the largest value.
  std::vector<int> watch;
  for (const auto& t : targets) {
    if (!grid.contains(t)) throw Error(ErrorKind::InvalidProblem, "eikonal target outside box");
    const Eigen::Vector2d r = (t - grid.origin) / h;
    const int ti = std::clamp(static_cast<int>(std::floor(r[0])), 0, m - 2);
    const int tj = std::clamp(static_cast<int>(std::floor(r[1])), 0, m - 2);
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) watch.push_back(idx(ti + di, tj + dj));
  }
  std::sort(watch.begin(), watch.end());
  watch.erase(std::unique(watch.begin(), watch.end()), watch.end());
  std::size_t pending = 0;
  for (int k : watch)
    if (state[k] != State::Known) ++pending;
  std::vector<char> watched(density.size(), 0);
  for (int k : watch) watched[k] = 1;

  double stop_at = watch.empty() ? kInf : -1.0;
  double watch_max = 0.0;
  for (int k : watch)
    if (state[k] == State::Known) watch_max = std::max(watch_max, u[k]);
  if (!watch.empty() && pending == 0) stop_at = 1.02 * watch_max + 4.0 * h * max_density;

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    const int k = top.index;
    if (state[k] == State::Known || top.value > u[k]) continue;
    if (stop_at >= 0.0 && top.value > stop_at) break;
    state[k] = State::Known;
    if (watched[k]) {
      watch_max = std::max(watch_max, u[k]);
      if (--pending == 0) stop_at = 1.02 * watch_max + 4.0 * h * max_density;
    }
    const int i = k / m, j = k % m;
    if (i > 0) update(i - 1, j);
    if (i + 1 < m) update(i + 1, j);
    if (j > 0) update(i, j - 1);
    if (j + 1 < m) update(i, j + 1);
  }

  ArrivalField field;
  field.grid = grid;
  field.source = source;
  field.energy = energy;
  field.values.resize(m, m);
  double bmin = kInf;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const int k = idx(i, j);
      const double val = state[k] == State::Known ? u[k] : kInf;
      field.values(i, j) = val;
      if (i == 0 || j == 0 || i == m - 1 || j == m - 1) bmin = std::min(bmin, val);
    }
  }
  field.boundary_min = bmin;
  double level = 0.0;
  for (const auto& t : targets) level = std::max(level, field.at(t));
  field.target_level = level;
  field.boundary_contact = !targets.empty() && bmin <= level;
  return field;
}

ArrivalField solve_eikonal(const Problem& problem, int source_index, double energy) {
  std::vector<Eigen::Vector2d> targets;
  for (int i = 0; i < problem.size(); ++i) targets.emplace_back(problem.point(i)[0], problem.point(i)[1]);
  const Eigen::Vector2d src(problem.point(source_index)[0], problem.point(source_index)[1]);
  return solve_eikonal(problem, src, energy, targets);
}

Eigen::MatrixXd descend_to_source(const ArrivalField& field, const Eigen::Vector2d& target) {
  const double h = field.grid.spacing;
  const double step = 0.5 * h;
  std::vector<Eigen::Vector2d> pts{target};
  if ((target - field.source).norm() <= 1e-12 * h) {
    Eigen::MatrixXd out(2, 1);
    out.col(0) = field.source;
    return out;
  }
  if (!std::isfinite(field.at(target)))
    throw Error(ErrorKind::DescentStall, "target not reached by the arrival field");

  Eigen::Vector2d p = target;
  double up = field.at(p);
  int stalls = 0;
  const int max_steps = 40 * field.grid.cells + 100;
  for (int it = 0;; ++it) {
    if ((p - field.source).norm() <= h) break;
    if (it > max_steps) throw Error(ErrorKind::DescentStall, "descent exceeded the step budget");
    const Eigen::Vector2d g = field.gradient(p);
    const double gn = g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn)) throw Error(ErrorKind::DescentStall, "flat arrival field");
    const Eigen::Vector2d q = p - step * g / gn;
    if (!field.grid.contains(q)) throw Error(ErrorKind::DescentStall, "descent left the box");
    const double uq = field.at(q);
    if (!(uq < up)) {
      if (++stalls > 4) throw Error(ErrorKind::DescentStall, "arrival time stopped decreasing");
    } else {
      stalls = 0;
    }
    p = q;
    up = uq;
    pts.push_back(p);
  }
  pts.push_back(field.source);
  Eigen::MatrixXd out(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = pts[pts.size() - 1 - k];
  return out;
}

}  // namespace geoflux
