// SPDX-License-Identifier: Apache-2.0
#include "preim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

#include "preim/errors.hpp"

namespace preim {

SparseSymMatrix SparseSymMatrix::from_entries(std::size_t dimension, std::vector<Entry> entries) {
  for (const auto& e : entries) {
    if (e.row >= dimension || e.col >= dimension) {
      throw std::invalid_argument("SparseSymMatrix: entry index out of range");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseSymMatrix m;
  m.dimension_ = dimension;
  m.offsets_.assign(dimension + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    const std::size_t r = entries[k].row;
    const std::size_t c = entries[k].col;
    double sum = 0.0;
    for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) sum += entries[k].value;
    m.columns_.push_back(c);
    m.values_.push_back(sum);
    m.offsets_[r + 1] += 1;
  }
  std::partial_sum(m.offsets_.begin(), m.offsets_.end(), m.offsets_.begin());
  return m;
}

double SparseSymMatrix::at(std::size_t row, std::size_t col) const {
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[row]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

Vector SparseSymMatrix::multiply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension_) {
    throw std::invalid_argument("SparseSymMatrix::multiply: dimension mismatch");
  }
  Vector y(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[i] = s;
  }
  return y;
}

Vector SparseSymMatrix::diagonal() const {
  Vector d(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) d[i] = at(i, i);
  return d;
}

SparseSymMatrix SparseSymMatrix::add(const SparseSymMatrix& other, double alpha) const {
  if (other.dimension_ != dimension_) throw std::invalid_argument("SparseSymMatrix::add: dimension mismatch");
  std::vector<Entry> entries;
  entries.reserve(nonzeros() + other.nonzeros());
  for (std::size_t i = 0; i < dimension_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) entries.push_back({i, columns_[k], values_[k]});
    for (std::size_t k = other.offsets_[i]; k < other.offsets_[i + 1]; ++k)
      entries.push_back({i, other.columns_[k], alpha * other.values_[k]});
  }
  return from_entries(dimension_, std::move(entries));
}

SparseSymMatrix SparseSymMatrix::scaled(double alpha) const {
  SparseSymMatrix m = *this;
  for (double& v : m.values_) v *= alpha;
  return m;
}

bool SparseSymMatrix::is_symmetric(double relative_tolerance) const {
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < dimension_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (std::abs(values_[k] - at(columns_[k], i)) > relative_tolerance * scale) return false;
    }
  }
  return true;
}

Matrix SparseSymMatrix::to_dense() const {
  Matrix d = Matrix::Zero(dimension_, dimension_);
  for (std::size_t i = 0; i < dimension_; ++i)
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) d(i, columns_[k]) = values_[k];
  return d;
}

Eigen::SparseMatrix<double> SparseSymMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nonzeros());
  for (std::size_t i = 0; i < dimension_; ++i)
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(columns_[k]), values_[k]);
  Eigen::SparseMatrix<double> s(static_cast<Eigen::Index>(dimension_), static_cast<Eigen::Index>(dimension_));
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

SymmetricEigen sym_eig(const Matrix& input) {
  const Eigen::Index n = input.rows();
  if (n < 1 || input.cols() != n) throw std::invalid_argument("sym_eig: expected a nonempty square matrix");
  const double scale = input.cwiseAbs().maxCoeff();
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }

  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double frob = a.norm();

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * frob || off == 0.0) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rutishauser's rotation: t = tan(phi) with |phi| <= pi/4.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

Vector solve_spd(const SparseSymMatrix& a, const Vector& b, double tol) {
  const std::size_t n = a.dimension();
  if (static_cast<std::size_t>(b.size()) != n) throw std::invalid_argument("solve_spd: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_spd: tolerance must be positive");
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;

  const Vector inv_diag = a.diagonal().cwiseInverse();
  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  const std::size_t max_iter = 10 * std::max<std::size_t>(n, 1);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector ap = a.multiply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw NumericalFailure("solve_spd: matrix is not positive definite");
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    if (r.norm() <= tol * bnorm) {
      // Confirm against the true residual; the recursive one drifts.
      if ((b - a.multiply(x)).norm() <= tol * bnorm) return x;
      r = b - a.multiply(x);
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw NumericalFailure("solve_spd: no convergence within " + std::to_string(max_iter) + " iterations");
}

Vector forward_substitution(const Matrix& l, const Vector& b) {
  if (l.rows() != l.cols() || l.rows() != b.size()) {
    throw std::invalid_argument("forward_substitution: dimension mismatch");
  }
  Vector y(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    double s = b[i];
    for (Eigen::Index j = 0; j < i; ++j) s -= l(i, j) * y[j];
    y[i] = s;
  }
  return y;
}

struct SpdFactorization::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

SpdFactorization::SpdFactorization(const SparseSymMatrix& a)
    : impl_(std::make_unique<Impl>()), dimension_(a.dimension()) {
  impl_->ldlt.compute(a.to_eigen());
  if (impl_->ldlt.info() != Eigen::Success) throw NumericalFailure("SpdFactorization: factorization failed");
  const Vector d = impl_->ldlt.vectorD();
  if (d.size() > 0 && d.minCoeff() <= 0.0) throw NumericalFailure("SpdFactorization: matrix is not positive definite");
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

Vector SpdFactorization::solve(const Vector& b) const {
  if (static_cast<std::size_t>(b.size()) != dimension_) throw std::invalid_argument("SpdFactorization: dimension mismatch");
  Vector x = impl_->ldlt.solve(b);
  if (impl_->ldlt.info() != Eigen::Success || !x.allFinite()) throw NumericalFailure("SpdFactorization: solve failed");
  return x;
}

}  // namespace preim
