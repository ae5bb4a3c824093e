// SPDX-License-Identifier: Apache-2.0
#include "preim/rom.hpp"

#include <stdexcept>

#include <Eigen/Cholesky>

#include "preim/errors.hpp"

namespace preim {
namespace {

Matrix apply_columns(const SparseSymMatrix& a, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = a.multiply(x.col(j));
  return out;
}

// Per-triangle gradient of every basis function: rows e, columns n.
void basis_gradients(const Mesh& mesh, const Matrix& theta, Matrix& gx, Matrix& gy) {
  const auto e_count = static_cast<Eigen::Index>(mesh.triangle_count());
  gx.setZero(e_count, theta.cols());
  gy.setZero(e_count, theta.cols());
  for (Eigen::Index e = 0; e < e_count; ++e) {
    const auto& t = mesh.triangles()[static_cast<std::size_t>(e)];
    for (int i = 0; i < 3; ++i) {
      const Point& g = mesh.shape_gradient(static_cast<std::size_t>(e), i);
      gx.row(e) += g.x() * theta.row(static_cast<Eigen::Index>(t[i]));
      gy.row(e) += g.y() * theta.row(static_cast<Eigen::Index>(t[i]));
    }
  }
}

}  // namespace

ReducedModel reduce_operators(const RBasis& basis, const HFModel& model, const GramOperator& gram,
                              const EimApprox& eim) {
  const Mesh& mesh = model.mesh();
  const Matrix& theta = basis.modes;
  if (static_cast<std::size_t>(theta.rows()) != mesh.node_count()) {
    throw std::invalid_argument("reduce_operators: basis does not live on the model mesh");
  }
  if (eim.grid_size() != model.grid().size()) {
    throw std::invalid_argument("reduce_operators: EIM grid does not match the model grid");
  }
  const Eigen::Index n = theta.cols();
  const int steps = model.steps();

  ReducedModel rom{basis, eim, {}};
  ReducedOperators& ops = rom.ops;
  ops.grid_mode = model.grid_mode();
  ops.kind = model.gamma().kind;
  ops.times = model.times();
  ops.mass = theta.transpose() * apply_columns(model.mass(), theta);
  ops.stiffness = theta.transpose() * apply_columns(model.stiffness(), theta);
  ops.mass = 0.5 * (ops.mass + ops.mass.transpose()).eval();
  ops.stiffness = 0.5 * (ops.stiffness + ops.stiffness.transpose()).eval();
  ops.load.resize(steps, n);
  for (int k = 1; k <= steps; ++k) ops.load.row(k - 1) = (theta.transpose() * model.load(k)).transpose();
  ops.initial = project(basis, gram, model.initial()).coefficients;
  ops.interpolation = eim.b;

  Matrix gx;
  Matrix gy;
  basis_gradients(mesh, theta, gx, gy);
  const Eigen::Index e_count = gx.rows();

  // C_j = sum_e |e| q_j(e) grad(theta)^T grad(theta), with q_j read at the
  // centroid (or averaged from the vertices on a nodes grid).
  ops.nonlinear.clear();
  for (std::size_t j = 0; j < eim.rank(); ++j) {
    const Vector qe = centroid_values(mesh, model.grid_mode(), eim.q.col(static_cast<Eigen::Index>(j)));
    Vector w(e_count);
    for (Eigen::Index e = 0; e < e_count; ++e) w[e] = mesh.area(static_cast<std::size_t>(e)) * qe[e];
    Matrix cj = gx.transpose() * w.asDiagonal() * gx + gy.transpose() * w.asDiagonal() * gy;
    ops.nonlinear.push_back(0.5 * (cj + cj.transpose()));
  }

  const auto m = static_cast<Eigen::Index>(eim.rank());
  if (ops.kind == Nonlinearity::Kind::gradient) {
    ops.point_values.resize(m, 2 * n);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto e = static_cast<Eigen::Index>(eim.points[static_cast<std::size_t>(j)]);
      ops.point_values.block(j, 0, 1, n) = gx.row(e);
      ops.point_values.block(j, n, 1, n) = gy.row(e);
    }
  } else {
    ops.point_values.resize(m, n);
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t x = eim.points[static_cast<std::size_t>(j)];
      if (ops.grid_mode == GridMode::nodes) {
        ops.point_values.row(j) = theta.row(static_cast<Eigen::Index>(x));
      } else {
        const auto& t = mesh.triangles()[x];
        ops.point_values.row(j) = (theta.row(static_cast<Eigen::Index>(t[0])) +
                                   theta.row(static_cast<Eigen::Index>(t[1])) +
                                   theta.row(static_cast<Eigen::Index>(t[2]))) / 3.0;
      }
    }
  }
  return rom;
}

Vector reduced_gamma_at_points(const ReducedOperators& ops, const Nonlinearity& gamma, double mu, const Vector& c) {
  const Eigen::Index m = static_cast<Eigen::Index>(ops.rank());
  const Eigen::Index n = c.size();
  Vector out(m);
  if (ops.kind == Nonlinearity::Kind::gradient) {
    const Vector dx = ops.point_values.leftCols(n) * c;
    const Vector dy = ops.point_values.rightCols(n) * c;
    for (Eigen::Index j = 0; j < m; ++j) out[j] = gamma.of_gradient(mu, dx[j], dy[j]);
  } else {
    const Vector u = ops.point_values * c;
    for (Eigen::Index j = 0; j < m; ++j) out[j] = gamma.of_solution(mu, u[j]);
  }
  return out;
}

namespace {

template <class NonlinearMatrix>
ReducedTrajectory march(const ReducedOperators& ops, NonlinearMatrix&& nonlinear_matrix) {
  const int steps = ops.times.steps();
  ReducedTrajectory out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(ops.initial);
  Eigen::LLT<Matrix> llt;
  double factored_dt = -1.0;
  for (int k = 1; k <= steps; ++k) {
    const double dt = ops.times.dt(k);
    if (dt != factored_dt) {
      llt.compute(ops.mass + dt * ops.stiffness);
      if (llt.info() != Eigen::Success) throw NumericalFailure("online_solve: reduced system is not SPD");
      factored_dt = dt;
    }
    const Vector& prev = out.back();
    const Vector rhs = dt * ops.load.row(k - 1).transpose() + ops.mass * prev - dt * (nonlinear_matrix(prev) * prev);
    out.push_back(llt.solve(rhs));
  }
  return out;
}

}  // namespace

ReducedTrajectory online_solve(const ReducedOperators& ops, const Nonlinearity& gamma, double mu) {
  const auto n = static_cast<Eigen::Index>(ops.basis_size());
  Matrix d(n, n);
  return march(ops, [&](const Vector& prev) -> const Matrix& {
    const Vector phi = forward_substitution(ops.interpolation, reduced_gamma_at_points(ops, gamma, mu, prev));
    d.setZero();
    for (std::size_t j = 0; j < ops.rank(); ++j) d += phi[static_cast<Eigen::Index>(j)] * ops.nonlinear[j];
    return d;
  });
}

ReducedTrajectory online_solve_exact_nonlinearity(const ReducedModel& rom, const HFModel& model, double mu) {
  const Matrix& theta = rom.basis.modes;
  Matrix d;
  return march(rom.ops, [&](const Vector& prev) -> const Matrix& {
    const Vector u = theta * prev;
    const Vector g = gamma_field(model, mu, u);
    Matrix tn(theta.rows(), theta.cols());
    for (Eigen::Index j = 0; j < theta.cols(); ++j) tn.col(j) = assemble_nonlinear_vector(model, theta.col(j), g);
    d = theta.transpose() * tn;
    return d;
  });
}

Trajectory reconstruct(const RBasis& basis, const ReducedTrajectory& reduced, double mu) {
  Trajectory t{mu, {}};
  t.fields.reserve(reduced.size());
  for (const auto& c : reduced) {
    if (c.size() != basis.modes.cols()) throw std::invalid_argument("reconstruct: coefficient length does not match the basis");
    t.fields.push_back(basis.modes * c);
  }
  return t;
}

ReducedOperators truncate(const ReducedOperators& ops, std::size_t n, std::size_t m) {
  if (n > ops.basis_size() || m > ops.rank()) throw std::invalid_argument("truncate: requested size exceeds the model");
  const auto ni = static_cast<Eigen::Index>(n);
  const auto mi = static_cast<Eigen::Index>(m);
  const auto full_n = static_cast<Eigen::Index>(ops.basis_size());
  ReducedOperators out;
  out.grid_mode = ops.grid_mode;
  out.kind = ops.kind;
  out.times = ops.times;
  out.mass = ops.mass.topLeftCorner(ni, ni);
  out.stiffness = ops.stiffness.topLeftCorner(ni, ni);
  out.load = ops.load.leftCols(ni);
  out.initial = ops.initial.head(ni);
  for (std::size_t j = 0; j < m; ++j) out.nonlinear.push_back(ops.nonlinear[j].topLeftCorner(ni, ni));
  out.interpolation = ops.interpolation.topLeftCorner(mi, mi);
  if (ops.kind == Nonlinearity::Kind::gradient) {
    out.point_values.resize(mi, 2 * ni);
    out.point_values.leftCols(ni) = ops.point_values.topLeftCorner(mi, ni);
    out.point_values.rightCols(ni) = ops.point_values.block(0, full_n, mi, ni);
  } else {
    out.point_values = ops.point_values.topLeftCorner(mi, ni);
  }
  return out;
}

}  // namespace preim
