// SPDX-License-Identifier: Apache-2.0
#include "preim/eim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "preim/errors.hpp"
#include "preim/parallel.hpp"

namespace preim {

EimApprox empty_eim(std::size_t grid_size) {
  EimApprox eim;
  eim.q.resize(static_cast<Eigen::Index>(grid_size), 0);
  eim.b.resize(0, 0);
  return eim;
}

Vector eim_coefficients(const EimApprox& eim, const Vector& values_at_points) {
  if (static_cast<std::size_t>(values_at_points.size()) != eim.rank()) {
    throw std::invalid_argument("eim_coefficients: expected one value per interpolation point");
  }
  return forward_substitution(eim.b, values_at_points);
}

Vector eim_evaluate(const EimApprox& eim, const Vector& coefficients) {
  if (eim.rank() == 0) return Vector::Zero(eim.q.rows());
  return eim.q * coefficients;
}

Vector eim_interpolate(const EimApprox& eim, const Vector& field) {
  if (static_cast<std::size_t>(field.size()) != eim.grid_size()) {
    throw std::invalid_argument("eim_interpolate: field length does not match the grid");
  }
  Vector at_points(static_cast<Eigen::Index>(eim.rank()));
  for (std::size_t j = 0; j < eim.rank(); ++j) at_points[static_cast<Eigen::Index>(j)] = field[eim.points[j]];
  return eim_evaluate(eim, eim_coefficients(eim, at_points));
}

Vector eim_residual(const EimApprox& eim, const Vector& field) { return field - eim_interpolate(eim, field); }

std::size_t eim_append(EimApprox& eim, const Vector& residual) {
  if (static_cast<std::size_t>(residual.size()) != eim.grid_size()) {
    throw std::invalid_argument("eim_append: residual length does not match the grid");
  }
  if (!residual.allFinite()) throw DegenerateResidual("eim_append: residual is not finite");
  Eigen::Index point = 0;
  const double peak = residual.cwiseAbs().maxCoeff(&point);
  if (!(peak > 0.0) || !std::isfinite(peak)) throw DegenerateResidual("eim_append: residual vanishes on the grid");

  if (std::find(eim.points.begin(), eim.points.end(), static_cast<std::size_t>(point)) != eim.points.end()) {
    throw DegenerateResidual("eim_append: residual peaks at an existing interpolation point");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(eim.rank());
  eim.q.conservativeResize(Eigen::NoChange, m + 1);
  eim.q.col(m) = residual / residual[point];
  eim.q(point, m) = 1.0;
  // The residual vanishes at earlier points in exact arithmetic; pin those zeros.
  for (Eigen::Index i = 0; i < m; ++i) eim.q(static_cast<Eigen::Index>(eim.points[static_cast<std::size_t>(i)]), m) = 0.0;
  eim.points.push_back(static_cast<std::size_t>(point));

  Matrix b(m + 1, m + 1);
  if (m > 0) b.topLeftCorner(m, m) = eim.b;
  for (Eigen::Index j = 0; j <= m; ++j) b(m, j) = eim.q(point, j);
  for (Eigen::Index i = 0; i < m; ++i) b(i, m) = 0.0;
  eim.b = std::move(b);
  return static_cast<std::size_t>(point);
}

EimApprox truncate(const EimApprox& eim, std::size_t rank) {
  if (rank > eim.rank()) throw std::invalid_argument("truncate: rank exceeds the EIM rank");
  EimApprox out;
  const auto m = static_cast<Eigen::Index>(rank);
  out.points.assign(eim.points.begin(), eim.points.begin() + m);
  out.q = eim.q.leftCols(m);
  out.b = eim.b.topLeftCorner(m, m);
  out.log.assign(eim.log.begin(), eim.log.begin() + std::min<std::ptrdiff_t>(m, static_cast<std::ptrdiff_t>(eim.log.size())));
  return out;
}

StandardEimResult standard_eim(const std::vector<double>& mus, const std::vector<std::vector<Vector>>& fields,
                               double eps) {
  if (mus.size() != fields.size() || mus.empty()) throw std::invalid_argument("standard_eim: parameter/sample mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("standard_eim: tolerance must be positive");
  const std::size_t grid = static_cast<std::size_t>(fields.front().front().size());

  // Residuals are kept for every sample and deflated in place after each pick,
  // which is equivalent to re-interpolating with the nested basis.
  std::vector<std::vector<Vector>> residuals = fields;
  StandardEimResult out{empty_eim(grid), {}};
  while (true) {
    double best = -1.0;
    std::size_t best_p = 0;
    std::size_t best_k = 0;
    for (std::size_t p = 0; p < residuals.size(); ++p) {
      for (std::size_t k = 0; k < residuals[p].size(); ++k) {
        const double n = residuals[p][k].cwiseAbs().maxCoeff();
        if (n > best) {
          best = n;
          best_p = p;
          best_k = k;
        }
      }
    }
    out.decay.push_back(best);
    if (best <= eps || out.eim.rank() >= grid) break;

    const Vector selected = residuals[best_p][best_k];
    const std::size_t x = eim_append(out.eim, selected);
    out.eim.log.push_back({mus[best_p], static_cast<int>(best_k), x, best});
    const Vector qm = out.eim.q.col(out.eim.q.cols() - 1);
    parallel_for(residuals.size(), [&](std::size_t p) {
      for (auto& r : residuals[p]) r -= r[static_cast<Eigen::Index>(x)] * qm;
    });
  }
  return out;
}

StandardEimResult standard_eim(const HFModel& model, const std::vector<Trajectory>& trajectories, double eps) {
  std::vector<double> mus;
  std::vector<std::vector<Vector>> fields(trajectories.size());
  for (const auto& t : trajectories) mus.push_back(t.mu);
  parallel_for(trajectories.size(), [&](std::size_t p) {
    for (const auto& u : trajectories[p].fields) fields[p].push_back(gamma_field(model, trajectories[p].mu, u));
  });
  return standard_eim(mus, fields, eps);
}

}  // namespace preim
