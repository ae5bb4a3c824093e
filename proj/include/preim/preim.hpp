// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "preim/eim.hpp"
#include "preim/fem.hpp"
#include "preim/pod.hpp"
#include "preim/rom.hpp"

namespace preim {

enum class Variant { preim, preim_nr, user };

const char* to_string(Variant variant);
Variant variant_from_string(const std::string& text);

/// One UPDATE_EIM attempt or one estimator-driven HF solve.
struct PreimIteration {
  std::string event;  // "init", "update" or "estimator"
  std::size_t m = 0;  // EIM rank targeted by this step
  double mu = 0.0;
  int k = 0;
  double mu_bar = 0.0;
  int k_bar = 0;
  bool new_hf = false;
  bool reselected = false;
  bool incr_rk = false;
  double r_tilde = 0.0;
  double r_bar = 0.0;
  double delta_eim = 0.0;
  double delta_rb = -1.0;  // negative when not evaluated
  std::size_t basis_size = 0;
  std::size_t hf_count = 0;
  std::string provenance;  // "hf" or "rb": origin of the field behind r_bar
};

struct PreimState {
  std::vector<double> training;
  GramOperator gram;
  std::vector<std::size_t> hf_order;             // training indices in insertion order
  std::map<std::size_t, Trajectory> hf_store;    // keyed by training index
  RBasis basis;
  EimApprox eim;
  ReducedModel rom;
  std::vector<std::string> provenance;  // one tag per interpolation function
  std::vector<double> delta_eim;
  std::vector<double> delta_rb;
  std::vector<PreimIteration> log;
  std::size_t hf_solves = 0;
  double hf_seconds = 0.0;

  bool has_hf(std::size_t index) const { return hf_store.count(index) != 0; }
  std::vector<double> hf_parameters() const;
};

/// Stored HF trajectory when the parameter has one, reduced reconstruction otherwise.
Trajectory surrogate_field(const PreimState& state, const HFModel& model, std::size_t index);

/// HF trajectories for the initial subset, relative POD of them, and the first
/// interpolation function from the largest Gamma sample over that subset.
PreimState init_preim(const HFModel& model, const std::vector<double>& training,
                      const std::vector<std::size_t>& initial_hf, double eps_pod);

struct UpdateEimResult {
  bool incr_rk = false;
  std::vector<Trajectory> new_trajectories;  // S_out
  double delta_eim = 0.0;
};

/// One UPDATE_EIM attempt. Mutates the HF store and, when the selection is kept,
/// the interpolation data. The reduced model is not rebuilt here.
UpdateEimResult update_eim(PreimState& state, const HFModel& model, double eps_eim, Variant variant);

/// sqrt(sum_k dt^k |rho^k|^2), rho^k the residual of the reconstructed reduced
/// trajectory in the HF time-step equations with the interpolated nonlinearity.
double error_estimator(const ReducedModel& rom, const HFModel& model, double mu);
double error_estimator(const PreimState& state, const HFModel& model, double mu);

/// Rebuilds the reduced operators from the current basis and interpolation data.
void refresh_rom(PreimState& state, const HFModel& model);

struct PreimOptions {
  double eps_pod = 1e-3;
  double eps_eim = 5e-2;
  double eps_rb = 1e-2;
  Variant variant = Variant::preim;
  bool rb_criterion = false;
  std::vector<std::size_t> initial_hf{0};
  std::size_t iteration_cap = 0;  // 0 selects 10 * |training| * K
};

struct PreimResult {
  ReducedModel rom;
  PreimState state;
};

PreimResult preim_offline(const HFModel& model, const std::vector<double>& training, const PreimOptions& options);

/// m, mu_m, k_m, mu_bar, k_bar, new_HF, delta_EIM, N, Card(P_HF) and the remaining diagnostics.
void write_iteration_log(const std::vector<PreimIteration>& log, const std::filesystem::path& path);

}  // namespace preim
