// SPDX-License-Identifier: Apache-2.0
#include "preim/preim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "preim/csv.hpp"
#include "preim/errors.hpp"
#include "preim/parallel.hpp"

namespace preim {

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::preim: return "preim";
    case Variant::preim_nr: return "preim-nr";
    case Variant::user: return "user";
  }
  return "preim";
}

Variant variant_from_string(const std::string& text) {
  if (text == "preim") return Variant::preim;
  if (text == "preim-nr") return Variant::preim_nr;
  if (text == "user") return Variant::user;
  throw std::invalid_argument("unknown PREIM variant: " + text);
}

std::vector<double> PreimState::hf_parameters() const {
  std::vector<double> out;
  for (std::size_t i : hf_order) out.push_back(training[i]);
  return out;
}

namespace {

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Trajectory reduced_trajectory(const PreimState& state, const HFModel& model, double mu) {
  return reconstruct(state.basis, online_solve(state.rom.ops, model.gamma(), mu), mu);
}

const Trajectory& store_hf(PreimState& state, const HFModel& model, std::size_t index) {
  const auto start = std::chrono::steady_clock::now();
  Trajectory t = hf_solve(model, state.training[index]);
  state.hf_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ++state.hf_solves;
  state.hf_order.push_back(index);
  return state.hf_store.emplace(index, std::move(t)).first->second;
}

std::vector<double> residual_norms(const EimApprox& eim, const HFModel& model, const Trajectory& t) {
  std::vector<double> out;
  out.reserve(t.fields.size());
  for (const auto& u : t.fields) out.push_back(sup_norm(eim_residual(eim, gamma_field(model, t.mu, u))));
  return out;
}

std::string describe(const PreimState& state) {
  std::ostringstream os;
  for (const auto& it : state.log) {
    os << it.event << " m=" << it.m << " mu=" << it.mu << " k=" << it.k << " mu_bar=" << it.mu_bar
       << " k_bar=" << it.k_bar << " new_hf=" << it.new_hf << " incr=" << it.incr_rk << " delta=" << it.delta_eim
       << " N=" << it.basis_size << " hf=" << it.hf_count << '\n';
  }
  return os.str();
}

}  // namespace

Trajectory surrogate_field(const PreimState& state, const HFModel& model, std::size_t index) {
  const auto it = state.hf_store.find(index);
  if (it != state.hf_store.end()) return it->second;
  return reduced_trajectory(state, model, state.training.at(index));
}

void refresh_rom(PreimState& state, const HFModel& model) {
  state.rom = reduce_operators(state.basis, model, state.gram, state.eim);
}

PreimState init_preim(const HFModel& model, const std::vector<double>& training,
                      const std::vector<std::size_t>& initial_hf, double eps_pod) {
  if (initial_hf.empty()) throw std::invalid_argument("init_preim: the initial HF set is empty");
  if (training.empty()) throw std::invalid_argument("init_preim: empty training set");
  PreimState state;
  state.training = training;
  state.gram = h1_gram(model);
  std::vector<std::size_t> initial = initial_hf;
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
  std::vector<Trajectory> trajectories;
  for (std::size_t i : initial) {
    if (i >= training.size()) throw std::invalid_argument("init_preim: initial index outside the training set");
    trajectories.push_back(store_hf(state, model, i));
  }
  state.basis = progressive_rb(trajectories, eps_pod, state.gram);

  state.eim = empty_eim(model.grid().size());
  double best = -1.0;
  std::size_t best_i = initial.front();
  int best_k = 0;
  Vector best_field;
  for (std::size_t i : initial) {
    const Trajectory& t = state.hf_store.at(i);
    for (int k = 0; k <= t.steps(); ++k) {
      Vector g = gamma_field(model, t.mu, t.fields[static_cast<std::size_t>(k)]);
      const double n = sup_norm(g);
      if (n > best) {
        best = n;
        best_i = i;
        best_k = k;
        best_field = std::move(g);
      }
    }
  }
  const std::size_t x = eim_append(state.eim, best_field);
  const double mu = training[best_i];
  state.eim.log.push_back({mu, best_k, x, best});
  state.provenance.push_back("hf");
  state.delta_eim.push_back(best);
  refresh_rom(state, model);

  PreimIteration it;
  it.event = "init";
  it.m = 1;
  it.mu = it.mu_bar = mu;
  it.k = it.k_bar = best_k;
  it.new_hf = true;
  it.incr_rk = true;
  it.r_tilde = it.r_bar = it.delta_eim = best;
  it.basis_size = state.basis.size();
  it.hf_count = state.hf_store.size();
  it.provenance = "hf";
  state.log.push_back(it);
  return state;
}

UpdateEimResult update_eim(PreimState& state, const HFModel& model, double eps_eim, Variant variant) {
  const std::size_t count = state.training.size();
  const int steps = model.steps();
  const bool reduced_everywhere = variant == Variant::user;

  // Residual sweep over training parameters and time nodes.
  std::vector<std::vector<double>> norms(count);
  parallel_for(count, [&](std::size_t i) {
    const bool hf = !reduced_everywhere && state.has_hf(i);
    const Trajectory t = hf ? state.hf_store.at(i) : reduced_trajectory(state, model, state.training[i]);
    norms[i] = residual_norms(state.eim, model, t);
  });

  double best = -1.0;
  for (const auto& row : norms) best = std::max(best, *std::max_element(row.begin(), row.end()));
  std::size_t mu_index = count;
  int k_m = 0;
  for (std::size_t i = 0; i < count && mu_index == count; ++i) {
    if (state.has_hf(i)) continue;
    for (int k = 0; k <= steps; ++k) {
      if (norms[i][static_cast<std::size_t>(k)] == best) {
        mu_index = i;
        k_m = k;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < count && mu_index == count; ++i) {
    for (int k = 0; k <= steps; ++k) {
      if (norms[i][static_cast<std::size_t>(k)] == best) {
        mu_index = i;
        k_m = k;
        break;
      }
    }
  }

  const double mu_m = state.training[mu_index];
  const bool selected_from_hf = !reduced_everywhere && state.has_hf(mu_index);
  const Trajectory selected =
      selected_from_hf ? state.hf_store.at(mu_index) : reduced_trajectory(state, model, mu_m);
  const Vector r_tilde =
      eim_residual(state.eim, gamma_field(model, mu_m, selected.fields[static_cast<std::size_t>(k_m)]));

  UpdateEimResult result;
  const bool new_hf = !state.has_hf(mu_index);
  if (new_hf) result.new_trajectories.push_back(store_hf(state, model, mu_index));

  std::size_t bar_index = mu_index;
  int k_bar = k_m;
  Vector r_bar;
  std::string provenance = "hf";
  if (variant == Variant::user) {
    r_bar = r_tilde;
    provenance = "rb";
  } else {
    if (variant == Variant::preim && new_hf) {
      // Re-selection among HF trajectories only: the sweep norms are already
      // HF-based for the previous set, the new parameter is evaluated here.
      norms[mu_index] = residual_norms(state.eim, model, state.hf_store.at(mu_index));
      double top = -1.0;
      for (std::size_t i = 0; i < count; ++i) {
        if (!state.has_hf(i)) continue;
        for (int k = 0; k <= steps; ++k) {
          if (norms[i][static_cast<std::size_t>(k)] > top) {
            top = norms[i][static_cast<std::size_t>(k)];
            bar_index = i;
            k_bar = k;
          }
        }
      }
    }
    const Trajectory& hf = state.hf_store.at(bar_index);
    r_bar = eim_residual(state.eim, gamma_field(model, hf.mu, hf.fields[static_cast<std::size_t>(k_bar)]));
  }

  const double r_bar_norm = sup_norm(r_bar);
  result.incr_rk = !(r_bar_norm < eps_eim) && r_bar_norm > 1e-14;
  result.delta_eim = r_bar_norm;

  PreimIteration it;
  it.event = "update";
  it.m = state.eim.rank() + 1;
  it.mu = mu_m;
  it.k = k_m;
  it.mu_bar = state.training[bar_index];
  it.k_bar = k_bar;
  it.new_hf = new_hf;
  it.reselected = bar_index != mu_index || k_bar != k_m;
  it.incr_rk = result.incr_rk;
  it.r_tilde = sup_norm(r_tilde);
  it.r_bar = r_bar_norm;
  it.delta_eim = r_bar_norm;
  it.provenance = provenance;

  if (result.incr_rk) {
    const std::size_t x = eim_append(state.eim, r_bar);
    state.eim.log.push_back({it.mu_bar, k_bar, x, r_bar_norm});
    state.provenance.push_back(provenance);
  }
  it.basis_size = state.basis.size();
  it.hf_count = state.hf_store.size();
  state.log.push_back(it);
  return result;
}

double error_estimator(const ReducedModel& rom, const HFModel& model, double mu) {
  const ReducedTrajectory c = online_solve(rom.ops, model.gamma(), mu);
  const Matrix& theta = rom.basis.modes;
  double total = 0.0;
  Vector previous = theta * c.front();
  for (int k = 1; k <= model.steps(); ++k) {
    const double dt = model.times().dt(k);
    const Vector current = theta * c[static_cast<std::size_t>(k)];
    const Vector& prev_c = c[static_cast<std::size_t>(k - 1)];
    const Vector gamma_hat =
        eim_evaluate(rom.eim, eim_coefficients(rom.eim, reduced_gamma_at_points(rom.ops, model.gamma(), mu, prev_c)));
    const Vector rho = model.mass().multiply(current) + dt * model.stiffness().multiply(current) -
                       dt * model.load(k) - model.mass().multiply(previous) +
                       dt * assemble_nonlinear_vector(model, previous, gamma_hat);
    total += dt * rho.squaredNorm();
    previous = current;
  }
  return std::sqrt(total);
}

double error_estimator(const PreimState& state, const HFModel& model, double mu) {
  return error_estimator(state.rom, model, mu);
}

namespace {

double max_estimator(const PreimState& state, const HFModel& model) {
  std::vector<double> values(state.training.size());
  parallel_for(values.size(), [&](std::size_t i) { values[i] = error_estimator(state, model, state.training[i]); });
  return *std::max_element(values.begin(), values.end());
}

}  // namespace

PreimResult preim_offline(const HFModel& model, const std::vector<double>& training, const PreimOptions& options) {
  if (!(options.eps_pod > 0.0) || !(options.eps_eim > 0.0) || !(options.eps_rb > 0.0)) {
    throw std::invalid_argument("preim_offline: thresholds must be positive");
  }
  PreimState state = init_preim(model, training, options.initial_hf, options.eps_pod);
  const std::size_t cap = options.iteration_cap > 0
                              ? options.iteration_cap
                              : 10 * training.size() * static_cast<std::size_t>(model.steps());
  double delta_rb = std::numeric_limits<double>::quiet_NaN();
  auto evaluate_rb = [&]() {
    if (!options.rb_criterion) return;
    delta_rb = max_estimator(state, model);
    state.delta_rb.push_back(delta_rb);
    state.log.back().delta_rb = delta_rb;
  };
  auto converged = [&](double delta_eim) {
    return delta_eim <= options.eps_eim && (!options.rb_criterion || delta_rb <= options.eps_rb);
  };
  auto absorb = [&](const std::vector<Trajectory>& trajectories) {
    for (const auto& t : trajectories) state.basis = update_rb(state.basis, t.fields, state.basis.update_threshold, state.gram);
    refresh_rom(state, model);
  };
  std::size_t attempts = 0;
  auto count_attempt = [&]() {
    if (++attempts > cap) {
      throw NonTermination("preim_offline: iteration cap exceeded", describe(state));
    }
  };

  evaluate_rb();
  bool done = converged(state.delta_eim.back());
  while (!done) {
    count_attempt();
    UpdateEimResult res = update_eim(state, model, options.eps_eim, options.variant);
    while (!res.incr_rk) {
      if (converged(res.delta_eim)) {
        absorb(res.new_trajectories);
        done = true;
        break;
      }
      absorb(res.new_trajectories);
      if (!res.new_trajectories.empty()) evaluate_rb();
      count_attempt();
      res = update_eim(state, model, options.eps_eim, options.variant);
      if (res.incr_rk) break;
      if (converged(res.delta_eim)) {
        absorb(res.new_trajectories);
        done = true;
        break;
      }
      // No progress from the available data: steer with one more HF trajectory
      // at the parameter the estimator trusts least.
      absorb(res.new_trajectories);
      std::size_t pick = training.size();
      double worst = -1.0;
      std::vector<double> values(training.size(), -1.0);
      parallel_for(training.size(), [&](std::size_t i) {
        if (!state.has_hf(i)) values[i] = error_estimator(state, model, training[i]);
      });
      for (std::size_t i = 0; i < training.size(); ++i) {
        if (!state.has_hf(i) && values[i] > worst) {
          worst = values[i];
          pick = i;
        }
      }
      if (pick == training.size()) {
        throw NonTermination("preim_offline: no parameter left for a new HF trajectory", describe(state));
      }
      res.new_trajectories = {store_hf(state, model, pick)};
      PreimIteration it;
      it.event = "estimator";
      it.m = state.eim.rank() + 1;
      it.mu = it.mu_bar = training[pick];
      it.new_hf = true;
      it.delta_eim = res.delta_eim;
      it.basis_size = state.basis.size();
      it.hf_count = state.hf_store.size();
      it.provenance = "hf";
      state.log.push_back(it);
    }
    if (done) break;
    absorb(res.new_trajectories);
    state.delta_eim.push_back(res.delta_eim);
    state.log.back().basis_size = state.basis.size();
    evaluate_rb();
  }
  if (!state.log.empty()) state.log.back().basis_size = state.basis.size();
  state.delta_eim.push_back(state.log.back().delta_eim);
  PreimResult out{state.rom, std::move(state)};
  return out;
}

void write_iteration_log(const std::vector<PreimIteration>& log, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& it : log) {
    rows.push_back({std::to_string(it.m), format_double(it.mu), std::to_string(it.k), format_double(it.mu_bar),
                    std::to_string(it.k_bar), it.new_hf ? "1" : "0", format_double(it.delta_eim),
                    std::to_string(it.basis_size), std::to_string(it.hf_count), it.event, it.incr_rk ? "1" : "0",
                    it.reselected ? "1" : "0", format_double(it.r_tilde), format_double(it.r_bar),
                    format_double(it.delta_rb), it.provenance});
  }
  write_table_csv(path,
                  {"m", "mu", "k", "mu_bar", "k_bar", "new_hf", "delta_eim", "N", "card_p_hf", "event", "incr_rk",
                   "reselected", "r_tilde", "r_bar", "delta_rb", "provenance"},
                  rows);
}

}  // namespace preim
