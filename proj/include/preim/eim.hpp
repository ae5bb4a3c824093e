// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "preim/fem.hpp"

namespace preim {

/// One greedy pick: the sample (mu, k) whose residual was largest, the grid
/// point where that residual peaked and the residual sup-norm at selection.
struct EimSelection {
  double mu = 0.0;
  int k = 0;
  std::size_t point = 0;
  double residual_norm = 0.0;
};

/// Interpolation data (X, Q, B) with B = Q(X, :) unit lower triangular.
struct EimApprox {
  std::vector<std::size_t> points;
  Matrix q;  // grid_size x M
  Matrix b;  // M x M
  std::vector<EimSelection> log;

  std::size_t rank() const { return points.size(); }
  std::size_t grid_size() const { return static_cast<std::size_t>(q.rows()); }
};

EimApprox empty_eim(std::size_t grid_size);

/// Solves B phi = gamma(X).
Vector eim_coefficients(const EimApprox& eim, const Vector& values_at_points);
/// Q phi on the full grid.
Vector eim_evaluate(const EimApprox& eim, const Vector& coefficients);
Vector eim_interpolate(const EimApprox& eim, const Vector& field);
Vector eim_residual(const EimApprox& eim, const Vector& field);

/// Adds the point argmax |r| (smallest index on ties) and the basis function
/// r / r(x). Returns the new point. Throws DegenerateResidual when r vanishes.
std::size_t eim_append(EimApprox& eim, const Vector& residual);

/// The first `rank` interpolation functions; Q and B are nested so this is exact.
EimApprox truncate(const EimApprox& eim, std::size_t rank);

struct StandardEimResult {
  EimApprox eim;
  /// Sup-norm of the selected residual at each greedy step, followed by the
  /// terminating residual (rank + 1 entries).
  std::vector<double> decay;
};

/// Greedy EIM over precomputed samples fields[p][k] for parameters mus[p].
/// Stops once the largest residual falls to eps or below. Ties go to the first
/// sample in (parameter, time) order.
StandardEimResult standard_eim(const std::vector<double>& mus, const std::vector<std::vector<Vector>>& fields,
                               double eps);
/// Greedy EIM over Gamma(mu, u^k(mu)) sampled from high-fidelity trajectories.
StandardEimResult standard_eim(const HFModel& model, const std::vector<Trajectory>& trajectories, double eps);

}  // namespace preim
