// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace preim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric matrix in compressed row storage; both triangles are stored and the
/// column indices of every row are sorted.
class SparseSymMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseSymMatrix() = default;

  /// Duplicate (row, col) entries are summed.
  static SparseSymMatrix from_entries(std::size_t dimension, std::vector<Entry> entries);

  std::size_t dimension() const { return dimension_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return offsets_; }
  const std::vector<std::size_t>& column_indices() const { return columns_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t row, std::size_t col) const;
  Vector multiply(const Vector& x) const;
  Vector diagonal() const;

  /// this + alpha * other.
  SparseSymMatrix add(const SparseSymMatrix& other, double alpha) const;
  SparseSymMatrix scaled(double alpha) const;

  bool is_symmetric(double relative_tolerance = 1e-14) const;
  Matrix to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;

 private:
  std::size_t dimension_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // column n pairs with values(n)
};

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
SymmetricEigen sym_eig(const Matrix& a);

/// Jacobi-preconditioned conjugate gradient; ||A x - b|| <= tol ||b||.
/// Throws NumericalFailure after 10 * dimension iterations.
Vector solve_spd(const SparseSymMatrix& a, const Vector& b, double tol = 1e-12);

/// Solves L y = b for unit lower-triangular L (the diagonal is assumed to be one).
Vector forward_substitution(const Matrix& l, const Vector& b);

/// Sparse LDL^T factorization, set up once and reused for many right-hand sides.
class SpdFactorization {
 public:
  explicit SpdFactorization(const SparseSymMatrix& a);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  Vector solve(const Vector& b) const;
  std::size_t dimension() const { return dimension_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t dimension_;
};

}  // namespace preim
