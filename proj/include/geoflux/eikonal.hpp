#pragma once

#include <Eigen/Dense>

#include "geoflux/core.hpp"

namespace geoflux {

/// Square lattice with `cells` cells per axis; node (i, j) sits at
/// origin + spacing * (i, j).
struct Grid2 {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double spacing = 1.0;
  int cells = 1;

  static Grid2 over(const Box& box, int cells);

  int nodes() const { return cells + 1; }
  Eigen::Vector2d node(int i, int j) const { return origin + spacing * Eigen::Vector2d(i, j); }
  bool contains(const Eigen::Vector2d& x) const;
};

/// First-arrival values of |grad u| = sqrt(E - V) from one source.
/// Nodes the march never accepted hold +infinity.
struct ArrivalField {
  Grid2 grid;
  Eigen::MatrixXd values;
  Eigen::Vector2d source = Eigen::Vector2d::Zero();
  double energy = 0.0;
  /// Smallest accepted value on the box boundary (+inf if none).
  double boundary_min = 0.0;
  /// Largest value at the problem points the march was asked to reach.
  double target_level = 0.0;
  /// The sublevel set containing every requested target touches the box edge,
  /// so geodesics to those targets may be clipped.
  bool boundary_contact = false;

  /// Bilinear interpolation; +inf if any corner is unreached.
  double at(const Eigen::Vector2d& x) const;
  /// Bilinear interpolation of nodal central differences.
  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const;

 private:
  Eigen::Vector2d node_gradient(int i, int j) const;
};

/// First-order fast marching from an arbitrary source point. Nodes within 1/32
/// of the box side (at least two cells) of the source are seeded with the
/// straight-segment integral of the metric density. The march stops once every target is enclosed and the
/// front has passed them by a small margin; pass no targets to march the box.
/// Throws EnergyTooLow when E < sup V + energy_tol.
ArrivalField solve_eikonal(const Problem& problem, const Eigen::Vector2d& source, double energy,
                           const std::vector<Eigen::Vector2d>& targets = {});

/// Field from problem point `source_index`, marched far enough to reach every
/// problem point.
ArrivalField solve_eikonal(const Problem& problem, int source_index, double energy);

/// Steepest descent of u from `target` back to the field's source with a step
/// of half a cell; returns the polyline ordered source -> target. Throws
/// DescentStall when u stops decreasing.
Eigen::MatrixXd descend_to_source(const ArrivalField& field, const Eigen::Vector2d& target);

}  // namespace geoflux
