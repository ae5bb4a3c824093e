// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "preim/mesh.hpp"
#include "preim/numerics.hpp"

namespace preim {

/// Parametrized conductivity perturbation Gamma(mu, state). The state is the
/// solution value (solution kind) or the solution gradient (gradient kind).
struct Nonlinearity {
  enum class Kind { solution, gradient };

  Kind kind = Kind::solution;
  std::function<double(double mu, double u)> of_solution;
  std::function<double(double mu, double dudx, double dudy)> of_gradient;

  static Nonlinearity zero();
  static Nonlinearity constant(double value);
};

/// Time steps dt^1..dt^K; t^0 = 0.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> steps);
  static TimeGrid uniform(int steps, double dt);

  int steps() const { return static_cast<int>(steps_.size()); }
  /// dt^k for k in 1..K.
  double dt(int k) const { return steps_[static_cast<std::size_t>(k - 1)]; }
  double time(int k) const { return times_[static_cast<std::size_t>(k)]; }
  double final_time() const { return times_.back(); }
  const std::vector<double>& step_sizes() const { return steps_; }

 private:
  std::vector<double> steps_;
  std::vector<double> times_{0.0};
};

struct ModelData {
  Mesh mesh;
  GridMode grid_mode = GridMode::nodes;
  double kappa0 = 1.0;
  Nonlinearity gamma;
  TimeGrid times;
  Vector initial;              // u0, one value per node
  std::vector<double> flux;    // phi_e^k for k = 0..K
  std::vector<Vector> source;  // f^k for k = 0..K, or empty for f = 0
};

/// High-fidelity P1 model. Mass, stiffness, loads and the factorized step
/// matrices M + dt A0 are assembled once at construction.
class HFModel {
 public:
  explicit HFModel(ModelData data);

  const Mesh& mesh() const { return data_.mesh; }
  const EvalGrid& grid() const { return grid_; }
  GridMode grid_mode() const { return data_.grid_mode; }
  double kappa0() const { return data_.kappa0; }
  const Nonlinearity& gamma() const { return data_.gamma; }
  const TimeGrid& times() const { return data_.times; }
  int steps() const { return data_.times.steps(); }
  const Vector& initial() const { return data_.initial; }
  double flux(int k) const { return data_.flux[static_cast<std::size_t>(k)]; }

  const SparseSymMatrix& mass() const { return mass_; }
  const SparseSymMatrix& stiffness() const { return stiffness_; }
  /// l^k for k in 1..K.
  const Vector& load(int k) const { return loads_[static_cast<std::size_t>(k)]; }
  /// Factorization of M + dt^k A0.
  const SpdFactorization& system(int k) const;

 private:
  ModelData data_;
  EvalGrid grid_;
  SparseSymMatrix mass_;
  SparseSymMatrix stiffness_;
  std::vector<Vector> loads_;
  std::vector<std::pair<double, std::shared_ptr<const SpdFactorization>>> systems_;
};

struct Trajectory {
  double mu = 0.0;
  std::vector<Vector> fields;  // u^0..u^K

  int steps() const { return static_cast<int>(fields.size()) - 1; }
};

SparseSymMatrix assemble_mass(const Mesh& mesh);
SparseSymMatrix assemble_stiffness(const Mesh& mesh, double kappa0);
/// Boundary vector b_p = int_{dOmega} theta_p (trapezoid rule, exact for P1 traces).
Vector assemble_boundary_mass(const Mesh& mesh);
Vector assemble_load(const Mesh& mesh, double phi_e);
Vector assemble_load(const Mesh& mesh, const Vector& source, double phi_e);

/// Gamma(mu, u) sampled on the evaluation grid.
Vector gamma_field(const Mesh& mesh, GridMode mode, const Nonlinearity& gamma, double mu, const Vector& u);
Vector gamma_field(const HFModel& model, double mu, const Vector& u);

/// Per-triangle value of a grid field under the one-point quadrature rule:
/// the centroid value itself (centroids grid) or the vertex average (nodes grid).
Vector centroid_values(const Mesh& mesh, GridMode mode, const Vector& grid_values);

/// n_p = sum_e |e| gamma_e (grad u . grad theta_p)|_e.
Vector assemble_nonlinear_vector(const HFModel& model, const Vector& u, const Vector& grid_values);

/// Supplies the nonlinearity samples used at step k from the previous state u^{k-1}.
using GammaProvider = std::function<Vector(int k, const Vector& previous)>;

/// Semi-implicit Euler march: diffusion implicit, nonlinearity explicit.
Trajectory hf_solve(const HFModel& model, double mu);
Trajectory hf_solve(const HFModel& model, double mu, const GammaProvider& provider);

/// min and max of kappa0 + Gamma over the grid samples of a trajectory.
std::pair<double, double> ellipticity_bounds(const HFModel& model, const Trajectory& trajectory);

/// One row per time node, one column per mesh node.
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);

}  // namespace preim
