// SPDX-License-Identifier: Apache-2.0
#include "preim/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "preim/csv.hpp"
#include "preim/errors.hpp"

namespace preim {

Nonlinearity Nonlinearity::zero() { return constant(0.0); }

Nonlinearity Nonlinearity::constant(double value) {
  Nonlinearity n;
  n.kind = Kind::solution;
  n.of_solution = [value](double, double) { return value; };
  return n;
}

TimeGrid::TimeGrid(std::vector<double> steps) : steps_(std::move(steps)) {
  for (double dt : steps_) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: time steps must be positive");
    times_.push_back(times_.back() + dt);
  }
}

TimeGrid TimeGrid::uniform(int steps, double dt) {
  if (steps < 1) throw std::invalid_argument("TimeGrid: need at least one step");
  return TimeGrid(std::vector<double>(static_cast<std::size_t>(steps), dt));
}

HFModel::HFModel(ModelData data) : data_(std::move(data)) {
  const std::size_t n = data_.mesh.node_count();
  const auto k_count = static_cast<std::size_t>(data_.times.steps());
  if (!(data_.kappa0 > 0.0)) throw std::invalid_argument("HFModel: kappa0 must be positive");
  if (static_cast<std::size_t>(data_.initial.size()) != n) throw std::invalid_argument("HFModel: u0 length mismatch");
  if (data_.flux.size() != k_count + 1) throw std::invalid_argument("HFModel: need K+1 flux values");
  if (!data_.source.empty() && data_.source.size() != k_count + 1) {
    throw std::invalid_argument("HFModel: need K+1 source fields");
  }
  if (data_.gamma.kind == Nonlinearity::Kind::gradient && data_.grid_mode == GridMode::nodes) {
    throw UnsupportedConfiguration("gradient nonlinearities need the centroids grid");
  }
  grid_ = eval_grid(data_.mesh, data_.grid_mode);
  mass_ = assemble_mass(data_.mesh);
  stiffness_ = assemble_stiffness(data_.mesh, data_.kappa0);

  const Vector boundary = assemble_boundary_mass(data_.mesh);
  loads_.resize(k_count + 1, Vector::Zero(static_cast<Eigen::Index>(n)));
  for (std::size_t k = 1; k <= k_count; ++k) {
    loads_[k] = data_.flux[k] * boundary;
    if (!data_.source.empty()) loads_[k] += mass_.multiply(data_.source[k]);
  }
  for (double dt : data_.times.step_sizes()) {
    const bool seen = std::any_of(systems_.begin(), systems_.end(), [dt](const auto& s) { return s.first == dt; });
    if (!seen) systems_.emplace_back(dt, std::make_shared<const SpdFactorization>(mass_.add(stiffness_, dt)));
  }
}

const SpdFactorization& HFModel::system(int k) const {
  const double dt = data_.times.dt(k);
  for (const auto& [step, factor] : systems_)
    if (step == dt) return *factor;
  throw std::logic_error("HFModel::system: no factorization for step");
}

SparseSymMatrix assemble_mass(const Mesh& mesh) {
  std::vector<SparseSymMatrix::Entry> entries;
  entries.reserve(9 * mesh.triangle_count());
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = mesh.triangles()[e];
    const double a = mesh.area(e) / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) entries.push_back({t[i], t[j], (i == j ? 2.0 : 1.0) * a});
  }
  return SparseSymMatrix::from_entries(mesh.node_count(), std::move(entries));
}

SparseSymMatrix assemble_stiffness(const Mesh& mesh, double kappa0) {
  std::vector<SparseSymMatrix::Entry> entries;
  entries.reserve(9 * mesh.triangle_count());
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = mesh.triangles()[e];
    const double a = kappa0 * mesh.area(e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        entries.push_back({t[i], t[j], a * mesh.shape_gradient(e, i).dot(mesh.shape_gradient(e, j))});
  }
  return SparseSymMatrix::from_entries(mesh.node_count(), std::move(entries));
}

Vector assemble_boundary_mass(const Mesh& mesh) {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
  for (const auto& edge : mesh.boundary_edges()) {
    b[edge.a] += 0.5 * edge.length;
    b[edge.b] += 0.5 * edge.length;
  }
  return b;
}

Vector assemble_load(const Mesh& mesh, double phi_e) { return phi_e * assemble_boundary_mass(mesh); }

Vector assemble_load(const Mesh& mesh, const Vector& source, double phi_e) {
  if (static_cast<std::size_t>(source.size()) != mesh.node_count()) {
    throw std::invalid_argument("assemble_load: source length mismatch");
  }
  return assemble_mass(mesh).multiply(source) + assemble_load(mesh, phi_e);
}

Vector gamma_field(const Mesh& mesh, GridMode mode, const Nonlinearity& gamma, double mu, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.node_count()) {
    throw std::invalid_argument("gamma_field: field length mismatch");
  }
  if (gamma.kind == Nonlinearity::Kind::gradient) {
    if (mode == GridMode::nodes) throw UnsupportedConfiguration("gradient nonlinearity on the nodes grid");
    const auto grads = element_gradients(mesh, u);
    Vector g(static_cast<Eigen::Index>(grads.size()));
    for (std::size_t e = 0; e < grads.size(); ++e) g[e] = gamma.of_gradient(mu, grads[e].x(), grads[e].y());
    return g;
  }
  if (mode == GridMode::nodes) {
    Vector g(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = gamma.of_solution(mu, u[i]);
    return g;
  }
  Vector g(static_cast<Eigen::Index>(mesh.triangle_count()));
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = mesh.triangles()[e];
    g[e] = gamma.of_solution(mu, (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0);
  }
  return g;
}

Vector gamma_field(const HFModel& model, double mu, const Vector& u) {
  return gamma_field(model.mesh(), model.grid_mode(), model.gamma(), mu, u);
}

Vector centroid_values(const Mesh& mesh, GridMode mode, const Vector& grid_values) {
  if (mode == GridMode::centroids) {
    if (static_cast<std::size_t>(grid_values.size()) != mesh.triangle_count()) {
      throw std::invalid_argument("centroid_values: expected one value per triangle");
    }
    return grid_values;
  }
  if (static_cast<std::size_t>(grid_values.size()) != mesh.node_count()) {
    throw std::invalid_argument("centroid_values: expected one value per node");
  }
  Vector c(static_cast<Eigen::Index>(mesh.triangle_count()));
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = mesh.triangles()[e];
    c[e] = (grid_values[t[0]] + grid_values[t[1]] + grid_values[t[2]]) / 3.0;
  }
  return c;
}

Vector assemble_nonlinear_vector(const HFModel& model, const Vector& u, const Vector& grid_values) {
  const Mesh& mesh = model.mesh();
  if (static_cast<std::size_t>(u.size()) != mesh.node_count() ||
      static_cast<std::size_t>(grid_values.size()) != model.grid().size()) {
    throw std::invalid_argument("assemble_nonlinear_vector: length mismatch");
  }
  const Vector gamma_e = centroid_values(mesh, model.grid_mode(), grid_values);
  Vector out = Vector::Zero(u.size());
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = mesh.triangles()[e];
    const Point grad = u[t[0]] * mesh.shape_gradient(e, 0) + u[t[1]] * mesh.shape_gradient(e, 1) +
                       u[t[2]] * mesh.shape_gradient(e, 2);
    const double w = mesh.area(e) * gamma_e[e];
    for (int i = 0; i < 3; ++i) out[t[i]] += w * grad.dot(mesh.shape_gradient(e, i));
  }
  return out;
}

Trajectory hf_solve(const HFModel& model, double mu) {
  return hf_solve(model, mu, [&](int, const Vector& previous) { return gamma_field(model, mu, previous); });
}

Trajectory hf_solve(const HFModel& model, double mu, const GammaProvider& provider) {
  Trajectory traj{mu, {}};
  traj.fields.reserve(static_cast<std::size_t>(model.steps()) + 1);
  traj.fields.push_back(model.initial());
  for (int k = 1; k <= model.steps(); ++k) {
    const Vector& prev = traj.fields.back();
    const double dt = model.times().dt(k);
    const Vector nonlinear = assemble_nonlinear_vector(model, prev, provider(k, prev));
    const Vector rhs = dt * model.load(k) + model.mass().multiply(prev) - dt * nonlinear;
    traj.fields.push_back(model.system(k).solve(rhs));
  }
  return traj;
}

std::pair<double, double> ellipticity_bounds(const HFModel& model, const Trajectory& trajectory) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& u : trajectory.fields) {
    const Vector g = gamma_field(model, trajectory.mu, u);
    lo = std::min(lo, model.kappa0() + g.minCoeff());
    hi = std::max(hi, model.kappa0() + g.maxCoeff());
  }
  return {lo, hi};
}

void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& u : trajectory.fields) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (i) out << ',';
      out << format_double(u[i]);
    }
    out << '\n';
  }
}

}  // namespace preim
