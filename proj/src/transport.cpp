#include "geoflux/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace geoflux {

std::vector<std::pair<int, int>> TransportPlan::support(double tol) const {
  std::vector<std::pair<int, int>> out;
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index s = 0; s < A.cols(); ++s)
      if (A(r, s) > tol) out.emplace_back(static_cast<int>(r), static_cast<int>(s));
  return out;
}

double TransportPlan::marginal_error(const Eigen::VectorXd& flux) const {
  double err = 0.0;
  for (std::size_t r = 0; r < sources.size(); ++r)
    err = std::max(err, std::abs(A.row(static_cast<Eigen::Index>(r)).sum() - flux[sources[r]]));
  for (std::size_t s = 0; s < sinks.size(); ++s)
    err = std::max(err, std::abs(A.col(static_cast<Eigen::Index>(s)).sum() + flux[sinks[s]]));
  return err;
}

double plan_cost(const TransportPlan& plan, const CostMatrix& cost) {
  double w = 0.0;
  for (std::size_t r = 0; r < plan.sources.size(); ++r)
    for (std::size_t s = 0; s < plan.sinks.size(); ++s)
      w += plan.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) *
           cost.table(plan.sources[r], plan.sinks[s]);
  return w;
}

namespace {

struct Bipartite {
  std::vector<int> sources;
  std::vector<int> sinks;
  Eigen::VectorXd supply;
  Eigen::VectorXd demand;
  Eigen::MatrixXd c;
};

Bipartite split(const CostMatrix& cost, const Eigen::VectorXd& flux, double tol) {
  Bipartite b;
  for (Eigen::Index i = 0; i < flux.size(); ++i) {
    if (flux[i] > 0.0) b.sources.push_back(static_cast<int>(i));
    else if (flux[i] < 0.0) b.sinks.push_back(static_cast<int>(i));
  }
  if (b.sources.empty() || b.sinks.empty()) throw Error(ErrorKind::Unbalanced, "need at least one source and one sink");
  const auto m = static_cast<Eigen::Index>(b.sources.size());
  const auto n = static_cast<Eigen::Index>(b.sinks.size());
  b.supply.resize(m);
  b.demand.resize(n);
  b.c.resize(m, n);
  for (Eigen::Index r = 0; r < m; ++r) b.supply[r] = flux[b.sources[r]];
  for (Eigen::Index s = 0; s < n; ++s) b.demand[s] = -flux[b.sinks[s]];
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index s = 0; s < n; ++s) {
      b.c(r, s) = cost.table(b.sources[r], b.sinks[s]);
      if (!std::isfinite(b.c(r, s))) throw Error(ErrorKind::InvalidProblem, "non-finite transport cost");
    }
  const double gap = b.supply.sum() - b.demand.sum();
  if (std::abs(gap) > tol * std::max(1.0, b.supply.sum()))
    throw Error(ErrorKind::Unbalanced, "marginals differ by " + std::to_string(gap));
  b.demand[n - 1] += gap;
  return b;
}

// Potentials u (rows), v (cols) with u_r + v_s = c_rs on the basis tree, u_0 = 0.
void tree_potentials(const Eigen::MatrixXd& c, const std::vector<char>& basic, Eigen::VectorXd& u,
                     Eigen::VectorXd& v) {
  const auto m = c.rows(), n = c.cols();
  std::vector<char> ku(m, 0), kv(n, 0);
  u.setZero(m);
  v.setZero(n);
  ku[0] = 1;
  bool progress = true;
  while (progress) {
    progress = false;
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index s = 0; s < n; ++s) {
        if (!basic[r * n + s]) continue;
        if (ku[r] && !kv[s]) {
          v[s] = c(r, s) - u[r];
          kv[s] = 1;
          progress = true;
        } else if (!ku[r] && kv[s]) {
          u[r] = c(r, s) - v[s];
          ku[r] = 1;
          progress = true;
        }
      }
  }
}

// Tree path from column node `col` to row node `row` as a list of cells.
std::vector<std::pair<int, int>> tree_path(int m, int n, const std::vector<char>& basic, int row, int col) {
  const int nodes = m + n;
  std::vector<int> parent(nodes, -2);
  std::vector<int> queue{m + col};
  parent[m + col] = -1;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int a = queue[q];
    if (a == row) break;
    if (a < m) {
      for (int s = 0; s < n; ++s)
        if (basic[a * n + s] && parent[m + s] == -2) {
          parent[m + s] = a;
          queue.push_back(m + s);
        }
    } else {
      const int s = a - m;
      for (int r = 0; r < m; ++r)
        if (basic[r * n + s] && parent[r] == -2) {
          parent[r] = a;
          queue.push_back(r);
        }
    }
  }
  std::vector<std::pair<int, int>> cells;
  for (int a = row; parent[a] != -1; a = parent[a]) {
    const int b = parent[a];
    cells.push_back(a < m ? std::make_pair(a, b - m) : std::make_pair(b, a - m));
  }
  std::reverse(cells.begin(), cells.end());  // now starts at the column end
  return cells;
}

}  // namespace

TransportSolution solve_transport(const CostMatrix& cost, const Eigen::VectorXd& flux, double tol) {
  const Bipartite b = split(cost, flux, tol);
  const int m = static_cast<int>(b.sources.size());
  const int n = static_cast<int>(b.sinks.size());

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
  std::vector<char> basic(static_cast<std::size_t>(m) * n, 0);

  // Northwest corner: m + n - 1 basic cells forming a staircase tree.
  {
    Eigen::VectorXd ra = b.supply, rb = b.demand;
    int r = 0, s = 0;
    for (;;) {
      const double q = std::min(ra[r], rb[s]);
      x(r, s) = q;
      basic[r * n + s] = 1;
      ra[r] -= q;
      rb[s] -= q;
      if (r == m - 1 && s == n - 1) break;
      if (r == m - 1) ++s;
      else if (s == n - 1) ++r;
      else if (ra[r] <= rb[s]) ++r;
      else ++s;
    }
  }

  const double scale = std::max(1.0, b.c.cwiseAbs().maxCoeff());
  const double rc_eps = 1e-12 * scale;
  Eigen::VectorXd u, v;
  for (int iter = 0;; ++iter) {
    if (iter > 100000) throw Error(ErrorKind::Unsupported, "transportation simplex failed to terminate");
    tree_potentials(b.c, basic, u, v);

    int er = -1, es = -1;
    for (int r = 0; r < m && er < 0; ++r)
      for (int s = 0; s < n; ++s)
        if (!basic[r * n + s] && b.c(r, s) - u[r] - v[s] < -rc_eps) {
          er = r;
          es = s;
          break;
        }
    if (er < 0) break;

    const auto path = tree_path(m, n, basic, er, es);
    // Signs alternate -, +, -, ... from the column end of the path.
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) theta = std::min(theta, x(path[k].first, path[k].second));
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const auto [r, s] = path[k];
      if (x(r, s) <= theta) {
        const int id = r * n + s;
        if (leave < 0 || id < leave) leave = id;
      }
    }
    x(er, es) += theta;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto [r, s] = path[k];
      x(r, s) += (k % 2 == 0 ? -theta : theta);
    }
    x(leave / n, leave % n) = 0.0;
    basic[leave] = 0;
    basic[er * n + es] = 1;
  }

  TransportSolution sol;
  sol.plan.sources = b.sources;
  sol.plan.sinks = b.sinks;
  sol.plan.A = x.cwiseMax(0.0);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < n; ++s)
      if (basic[r * n + s]) sol.plan.basis.emplace_back(r, s);
  sol.plan.cost = plan_cost(sol.plan, cost);

  const auto points = cost.table.rows();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(points);
  for (int r = 0; r < m; ++r) phi[b.sources[r]] = u[r];
  for (int s = 0; s < n; ++s) phi[b.sinks[s]] = -v[s];

  if (cost.metric) {
    // c-transform from the sources: psi(x_k) = max_i (phi_i - c(x_i, x_k)).
    // 1-Lipschitz for a metric table, and no worse in sum lambda phi.
    Eigen::VectorXd psi(points);
    for (Eigen::Index k = 0; k < points; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) best = std::max(best, phi[b.sources[r]] - (b.sources[r] == k ? 0.0 : cost.table(b.sources[r], k)));
      psi[k] = best;
    }
    phi = psi;
  }
  sol.duals.phi = phi;
  return sol;
}

TransportPlan brute_force_transport(const CostMatrix& cost, const Eigen::VectorXd& flux, double tol) {
  const Bipartite b = split(cost, flux, tol);
  const int m = static_cast<int>(b.sources.size());
  const int n = static_cast<int>(b.sinks.size());
  if (m * n > 12) throw Error(ErrorKind::TooLarge, std::to_string(m) + "x" + std::to_string(n) + " exceeds 12 cells");

  const int cells = m * n;
  const int k = m + n - 1;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);

  TransportPlan best;
  best.sources = b.sources;
  best.sinks = b.sinks;
  best.cost = std::numeric_limits<double>::infinity();
  const double neg_tol = 1e-12 * std::max(1.0, b.supply.sum());

  for (;;) {
    // Spanning-tree test by union-find over the m + n nodes.
    std::vector<int> root(m + n);
    std::iota(root.begin(), root.end(), 0);
    const auto find = [&](int a) {
      while (root[a] != a) a = root[a] = root[root[a]];
      return a;
    };
    bool tree = true;
    for (int id : pick) {
      const int ra = find(id / n), rb = find(m + id % n);
      if (ra == rb) {
        tree = false;
        break;
      }
      root[ra] = rb;
    }
    if (tree) {
      // Leaf elimination gives the unique flow on the tree.
      Eigen::VectorXd rem(m + n);
      rem << b.supply, b.demand;
      std::vector<char> used(k, 0);
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
      bool feasible = true;
      for (int round = 0; round < k; ++round) {
        int leaf_edge = -1, leaf_node = -1;
        for (int node = 0; node < m + n && leaf_edge < 0; ++node) {
          int deg = 0, last = -1;
          for (int e = 0; e < k; ++e) {
            if (used[e]) continue;
            const int id = pick[e];
            if (id / n == node || m + id % n == node) {
              ++deg;
              last = e;
            }
          }
          if (deg == 1) {
            leaf_edge = last;
            leaf_node = node;
          }
        }
        const int id = pick[leaf_edge];
        const int other = (id / n == leaf_node) ? m + id % n : id / n;
        const double q = rem[leaf_node];
        x(id / n, id % n) = q;
        rem[leaf_node] = 0.0;
        rem[other] -= q;
        used[leaf_edge] = 1;
        if (q < -neg_tol) feasible = false;
      }
      if (feasible) {
        double w = 0.0;
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < n; ++s) w += x(r, s) * b.c(r, s);
        if (w < best.cost - 1e-14 * std::max(1.0, std::abs(w))) {
          best.cost = w;
          best.A = x.cwiseMax(0.0);
          best.basis.clear();
          for (int id : pick) best.basis.emplace_back(id / n, id % n);
        }
      }
    }
    // Next k-combination of the cells.
    int i = k - 1;
    while (i >= 0 && pick[i] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  best.cost = plan_cost(best, cost);
  return best;
}

double check_complementary_slackness(const TransportPlan& plan, const DualPotentials& duals,
                                     const CostMatrix& cost, double tol) {
  double worst = 0.0;
  for (std::size_t r = 0; r < plan.sources.size(); ++r)
    for (std::size_t s = 0; s < plan.sinks.size(); ++s) {
      if (plan.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) <= tol) continue;
      const int i = plan.sources[r], j = plan.sinks[s];
      worst = std::max(worst, std::abs(duals.phi[i] - duals.phi[j] - cost.table(i, j)));
    }
  return worst;
}

double dual_feasibility_violation(const DualPotentials& duals, const CostMatrix& cost, bool all_pairs,
                                  const std::vector<int>& sources, const std::vector<int>& sinks) {
  double worst = 0.0;
  const auto& phi = duals.phi;
  if (all_pairs) {
    for (Eigen::Index j = 0; j < phi.size(); ++j)
      for (Eigen::Index k = 0; k < phi.size(); ++k)
        if (j != k) worst = std::max(worst, std::abs(phi[j] - phi[k]) - cost.table(j, k));
  } else {
    for (int i : sources)
      for (int j : sinks) worst = std::max(worst, phi[i] - phi[j] - cost.table(i, j));
  }
  return std::max(worst, 0.0);
}

}  // namespace geoflux
