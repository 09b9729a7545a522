#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "geoflux/errors.hpp"

namespace geoflux {

/// Costs indexed by point. Only the (source, sink) entries are required;
/// when `metric` is set the whole table is a metric and the duals are
/// repaired to be 1-Lipschitz over every pair.
struct CostMatrix {
  Eigen::MatrixXd table;
  bool metric = false;
};

/// A over I+ x I- with rows/cols in the order of `sources` / `sinks`.
struct TransportPlan {
  std::vector<int> sources;
  std::vector<int> sinks;
  Eigen::MatrixXd A;
  double cost = 0.0;
  /// Spanning-tree basis (row, col slots) of the final simplex tableau.
  std::vector<std::pair<int, int>> basis;

  std::vector<std::pair<int, int>> support(double tol) const;
  /// max |row sums - lambda_i| and |col sums - |lambda_j||.
  double marginal_error(const Eigen::VectorXd& flux) const;
};

/// Kantorovich potentials, one per point.
struct DualPotentials {
  Eigen::VectorXd phi;

  /// sum_i lambda_i phi_i.
  double objective(const Eigen::VectorXd& flux) const { return flux.dot(phi); }
};

struct TransportSolution {
  TransportPlan plan;
  DualPotentials duals;
};

/// sum_ij A_ij c(source_i, sink_j).
double plan_cost(const TransportPlan& plan, const CostMatrix& cost);

/// Transportation simplex on the bipartite graph (northwest-corner start,
/// Bland's rule for entering and leaving cells). Sink marginals are the
/// magnitudes |lambda_j|. Throws Unbalanced when sum lambda != 0 beyond tol.
TransportSolution solve_transport(const CostMatrix& cost, const Eigen::VectorXd& flux, double tol = 1e-9);

/// Exact optimum by enumerating every spanning-tree basis of the bipartite
/// graph; throws TooLarge when |I+| * |I-| > 12.
TransportPlan brute_force_transport(const CostMatrix& cost, const Eigen::VectorXd& flux, double tol = 1e-9);

/// max over cells with A_ij > tol of |(phi_i - phi_j) - c_ij|.
double check_complementary_slackness(const TransportPlan& plan, const DualPotentials& duals,
                                     const CostMatrix& cost, double tol);

/// max over all ordered pairs of (|phi_j - phi_k| - c_jk)_+ (0 when feasible).
double dual_feasibility_violation(const DualPotentials& duals, const CostMatrix& cost, bool all_pairs,
                                  const std::vector<int>& sources = {}, const std::vector<int>& sinks = {});

}  // namespace geoflux
