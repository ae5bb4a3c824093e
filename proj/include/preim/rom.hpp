// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "preim/eim.hpp"
#include "preim/fem.hpp"
#include "preim/pod.hpp"

namespace preim {

/// Everything the online stage needs; nothing here scales with the mesh.
struct ReducedOperators {
  GridMode grid_mode = GridMode::nodes;
  Nonlinearity::Kind kind = Nonlinearity::Kind::solution;
  TimeGrid times;
  Matrix mass;       // Theta^T M Theta
  Matrix stiffness;  // Theta^T A0 Theta
  Matrix load;       // row k-1 holds Theta^T l^k
  Vector initial;    // coordinates of the C-projection of u0
  std::vector<Matrix> nonlinear;  // C_j, one per interpolation function
  Matrix interpolation;           // B
  /// State samples of the basis at the interpolation points: theta_n(x_m) for a
  /// solution nonlinearity (M x N), or [d/dx theta_1..N | d/dy theta_1..N] for a
  /// gradient nonlinearity (M x 2N).
  Matrix point_values;

  std::size_t basis_size() const { return static_cast<std::size_t>(mass.rows()); }
  std::size_t rank() const { return nonlinear.size(); }
};

struct ReducedModel {
  RBasis basis;
  EimApprox eim;
  ReducedOperators ops;
};

using ReducedTrajectory = std::vector<Vector>;

ReducedModel reduce_operators(const RBasis& basis, const HFModel& model, const GramOperator& gram,
                              const EimApprox& eim);

/// gamma(mu, u_hat(x_m)) for reduced coordinates c.
Vector reduced_gamma_at_points(const ReducedOperators& ops, const Nonlinearity& gamma, double mu, const Vector& c);

/// Reduced semi-implicit march with the EIM-approximated nonlinearity.
ReducedTrajectory online_solve(const ReducedOperators& ops, const Nonlinearity& gamma, double mu);

/// Reduced march that evaluates the exact nonlinearity on the full grid.
/// Diagnostic only: the cost scales with the mesh.
ReducedTrajectory online_solve_exact_nonlinearity(const ReducedModel& rom, const HFModel& model, double mu);

Trajectory reconstruct(const RBasis& basis, const ReducedTrajectory& reduced, double mu);

/// Keeps the first n basis functions and the first m interpolation functions.
ReducedOperators truncate(const ReducedOperators& ops, std::size_t n, std::size_t m);

}  // namespace preim
