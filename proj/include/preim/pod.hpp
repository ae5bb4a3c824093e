// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "preim/fem.hpp"
#include "preim/numerics.hpp"

namespace preim {

/// Gram matrix C = M + eta A0 of the inner product used for orthonormalization.
struct GramOperator {
  SparseSymMatrix matrix;
  double eta = 1.0;

  Vector apply(const Vector& v) const { return matrix.multiply(v); }
  double inner(const Vector& a, const Vector& b) const { return a.dot(matrix.multiply(b)); }
  double norm(const Vector& v) const;
};

GramOperator make_gram(const SparseSymMatrix& mass, const SparseSymMatrix& stiffness, double eta);
/// eta = 1 / kappa0, so that C realizes int vw + int grad v . grad w.
GramOperator h1_gram(const HFModel& model);

/// C-orthonormal reduced basis stored column-wise.
struct RBasis {
  Matrix modes;               // node_count x N
  std::vector<double> sigma;  // singular value attached to each mode, in insertion order
  /// Absolute POD threshold applied to later incremental updates.
  double update_threshold = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(modes.cols()); }
  bool empty() const { return modes.cols() == 0; }
};

enum class PodThreshold { relative, absolute };

struct PodResult {
  RBasis basis;
  std::vector<double> sigma;      // every singular value of the snapshot set, descending
  double largest_truncated = 0.0;  // zero when nothing was truncated
};

/// Method of snapshots: eigen-decomposition of S^T C S. Keeps sigma_n >= eps * sigma_1
/// (relative) or sigma_n >= eps (absolute); sigma_n <= 1e-12 sigma_1 is always dropped.
PodResult pod(const std::vector<Vector>& snapshots, double eps, const GramOperator& gram, PodThreshold mode);

struct Projection {
  Vector coefficients;
  Vector residual;
};

Projection project(const RBasis& basis, const GramOperator& gram, const Vector& u);

/// Appends the POD modes of the projection residuals of the new snapshots whose
/// singular values exceed the absolute threshold (relative slack 1e-8).
/// An empty snapshot set leaves the basis unchanged.
RBasis update_rb(const RBasis& basis, const std::vector<Vector>& snapshots, double threshold,
                 const GramOperator& gram);

/// Relative POD of the first trajectory, then one incremental update per further
/// trajectory, using the largest singular value truncated at initialization as the
/// absolute threshold (eps_pod * sigma_1 if nothing was truncated).
RBasis progressive_rb(const std::vector<Trajectory>& trajectories, double eps_pod, const GramOperator& gram);

/// Largest |Theta^T C Theta - I| entry.
double orthonormality_defect(const RBasis& basis, const GramOperator& gram);

}  // namespace preim
