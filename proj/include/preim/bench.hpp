// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "preim/eim.hpp"
#include "preim/fem.hpp"
#include "preim/pod.hpp"
#include "preim/preim.hpp"
#include "preim/rom.hpp"

namespace preim {

struct CaseConfig {
  std::string id;
  double kappa0 = 1.0;
  double phi_e = 3.0;
  double u0 = 293.0;
  double u_m = 323.0;   // case a only
  double omega = 0.0;   // case b only
  double final_time = 0.0;
  int steps = 0;
  double dt = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  std::vector<double> training;
  std::vector<double> verification;
  std::vector<double> initial_hf;  // parameters of the initial PREIM HF set
  double eps_pod = 1e-3;
  double eps_eim = 5e-2;
  double eps_rb = 1e-2;
  GridMode grid_mode = GridMode::nodes;
  int refine = 10;
};

CaseConfig testcase_a();
CaseConfig testcase_b();
/// "a" or "b".
CaseConfig testcase(const std::string& id);

Nonlinearity case_nonlinearity(const CaseConfig& config);
/// Perforated plate at config.refine, uniform initial state u0, constant flux, f = 0.
HFModel build_model(const CaseConfig& config);

/// (sum_{k>=1} dt^k |u^k - v^k|_C^2)^{1/2}.
double spacetime_error(const Trajectory& u, const Trajectory& v, const GramOperator& gram, const TimeGrid& times);

/// max over all trajectories and time nodes of |Gamma - I_M Gamma|_inf.
double eim_sup_error(const EimApprox& eim, const std::vector<Trajectory>& trajectories, const HFModel& model);

/// Outcome of one offline pipeline, uniform across algorithms.
struct AlgorithmRun {
  std::string algo;
  ReducedModel rom;
  std::vector<double> hf_parameters;
  std::size_t hf_solves = 0;
  double hf_seconds = 0.0;
  double total_seconds = 0.0;
  /// Standard: selected residual norms then the terminating one. PREIM family: delta_EIM history.
  std::vector<double> decay;
  std::vector<PreimIteration> log;  // empty for the standard pipeline
  std::vector<std::string> provenance;
};

/// HF trajectories for every training parameter, progressive RB over all of
/// them, then the standard greedy EIM.
AlgorithmRun run_standard(const HFModel& model, const std::vector<double>& training, double eps_pod, double eps_eim);
/// Positions of config.initial_hf in config.training (the first training value when empty).
std::vector<std::size_t> initial_indices(const CaseConfig& config);
AlgorithmRun run_algorithm(const HFModel& model, const CaseConfig& config, const std::string& algo,
                           bool rb_criterion = false);

struct VerificationRow {
  double mu = 0.0;
  double error = 0.0;
  double reference_norm = 0.0;
};

std::vector<VerificationRow> verification_errors(const ReducedModel& rom, const HFModel& model,
                                                 const std::vector<Trajectory>& truths, const GramOperator& gram);

struct ComparisonReport {
  CaseConfig config;
  std::vector<AlgorithmRun> runs;
  std::vector<std::vector<VerificationRow>> errors;  // parallel to runs
};

/// Runs each algorithm on the case and, when out_dir is non-empty, writes
/// out_dir/<case>/<algo>/{eim_decay,selection,errors_vs_mu,summary}.csv.
ComparisonReport run_comparison(const CaseConfig& config, const std::vector<std::string>& algorithms,
                                const std::filesystem::path& out_dir);

void write_report(const ComparisonReport& report, const std::filesystem::path& out_dir);

}  // namespace preim
