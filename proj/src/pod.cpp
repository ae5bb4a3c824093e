// SPDX-License-Identifier: Apache-2.0
#include "preim/pod.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace preim {

double GramOperator::norm(const Vector& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

GramOperator make_gram(const SparseSymMatrix& mass, const SparseSymMatrix& stiffness, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("make_gram: eta must be positive");
  return GramOperator{mass.add(stiffness, eta), eta};
}

GramOperator h1_gram(const HFModel& model) {
  return make_gram(model.mass(), model.stiffness(), 1.0 / model.kappa0());
}

PodResult pod(const std::vector<Vector>& snapshots, double eps, const GramOperator& gram, PodThreshold mode) {
  if (snapshots.empty()) throw std::invalid_argument("pod: empty snapshot set");
  if (!(eps > 0.0)) throw std::invalid_argument("pod: threshold must be positive");
  const auto rows = snapshots.front().size();
  const auto count = static_cast<Eigen::Index>(snapshots.size());

  Matrix s(rows, count);
  Matrix cs(rows, count);
  for (Eigen::Index r = 0; r < count; ++r) {
    if (snapshots[static_cast<std::size_t>(r)].size() != rows) throw std::invalid_argument("pod: ragged snapshots");
    s.col(r) = snapshots[static_cast<std::size_t>(r)];
    cs.col(r) = gram.apply(s.col(r));
  }
  Matrix correlation = s.transpose() * cs;
  correlation = 0.5 * (correlation + correlation.transpose()).eval();

  PodResult out;
  out.basis.modes.resize(rows, 0);
  if (correlation.cwiseAbs().maxCoeff() == 0.0) {
    out.sigma.assign(snapshots.size(), 0.0);
    return out;
  }
  const SymmetricEigen eig = sym_eig(correlation);
  for (Eigen::Index n = 0; n < count; ++n) out.sigma.push_back(std::sqrt(std::max(0.0, eig.values[n])));

  const double sigma1 = out.sigma.front();
  const double threshold = mode == PodThreshold::relative ? eps * sigma1 : eps;
  const double floor = 1e-12 * sigma1;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index n = 0; n < count; ++n) {
    const double sn = out.sigma[static_cast<std::size_t>(n)];
    if (sn >= threshold && sn > floor) {
      kept.push_back(n);
    } else {
      out.largest_truncated = std::max(out.largest_truncated, sn);
    }
  }
  out.basis.modes.resize(rows, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Eigen::Index n = kept[j];
    const double sn = out.sigma[static_cast<std::size_t>(n)];
    out.basis.modes.col(static_cast<Eigen::Index>(j)) = s * eig.vectors.col(n) / sn;
    out.basis.sigma.push_back(sn);
  }
  return out;
}

Projection project(const RBasis& basis, const GramOperator& gram, const Vector& u) {
  Projection p;
  if (basis.empty()) {
    p.coefficients = Vector(0);
    p.residual = u;
    return p;
  }
  p.coefficients = basis.modes.transpose() * gram.apply(u);
  p.residual = u - basis.modes * p.coefficients;
  return p;
}

RBasis update_rb(const RBasis& basis, const std::vector<Vector>& snapshots, double threshold,
                 const GramOperator& gram) {
  if (snapshots.empty()) return basis;
  std::vector<Vector> residuals;
  residuals.reserve(snapshots.size());
  for (const auto& u : snapshots) residuals.push_back(project(basis, gram, u).residual);
  // Strictly above the threshold up to rounding: a residual mode that reproduces a
  // previously truncated singular value is not admitted.
  const PodResult fresh = pod(residuals, threshold * (1.0 + 1e-8), gram, PodThreshold::absolute);
  if (fresh.basis.empty()) return basis;

  RBasis out = basis;
  const Eigen::Index rows = fresh.basis.modes.rows();
  if (out.modes.rows() != rows) out.modes.resize(rows, 0);
  for (Eigen::Index j = 0; j < fresh.basis.modes.cols(); ++j) {
    Vector v = fresh.basis.modes.col(j);
    // Residual modes are C-orthogonal to the basis up to rounding; one more
    // Gram-Schmidt pass restores orthonormality to machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      if (out.modes.cols() > 0) v -= out.modes * (out.modes.transpose() * gram.apply(v));
    }
    const double nv = gram.norm(v);
    if (!(nv > 1e-8)) continue;
    out.modes.conservativeResize(Eigen::NoChange, out.modes.cols() + 1);
    out.modes.col(out.modes.cols() - 1) = v / nv;
    out.sigma.push_back(fresh.basis.sigma[static_cast<std::size_t>(j)]);
  }
  return out;
}

RBasis progressive_rb(const std::vector<Trajectory>& trajectories, double eps_pod, const GramOperator& gram) {
  if (trajectories.empty()) throw std::invalid_argument("progressive_rb: no trajectories");
  const PodResult first = pod(trajectories.front().fields, eps_pod, gram, PodThreshold::relative);
  RBasis basis = first.basis;
  basis.update_threshold =
      first.largest_truncated > 0.0 ? first.largest_truncated : eps_pod * (first.sigma.empty() ? 0.0 : first.sigma.front());
  for (std::size_t p = 1; p < trajectories.size(); ++p) {
    basis = update_rb(basis, trajectories[p].fields, basis.update_threshold, gram);
  }
  return basis;
}

double orthonormality_defect(const RBasis& basis, const GramOperator& gram) {
  if (basis.empty()) return 0.0;
  Matrix cm(basis.modes.rows(), basis.modes.cols());
  for (Eigen::Index j = 0; j < basis.modes.cols(); ++j) cm.col(j) = gram.apply(basis.modes.col(j));
  const Matrix g = basis.modes.transpose() * cm;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace preim
