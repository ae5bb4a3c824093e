// SPDX-License-Identifier: Apache-2.0
#include "preim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "preim/csv.hpp"
#include "preim/parallel.hpp"

namespace preim {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> integer_range(int first, int last) {
  std::vector<double> out;
  for (int i = first; i <= last; ++i) out.push_back(static_cast<double>(i));
  return out;
}

}  // namespace

CaseConfig testcase_a() {
  CaseConfig c;
  c.id = "a";
  c.kappa0 = 1.05;
  c.phi_e = 3.0;
  c.u0 = 293.0;
  c.u_m = 323.0;
  c.final_time = 5.0;
  c.steps = 50;
  c.dt = 0.1;
  c.p_min = 1.0;
  c.p_max = 20.0;
  c.training = integer_range(1, 20);
  for (int i = 0; i <= 80; ++i) {
    const double mu = 0.25 * i;
    if (mu >= c.p_min && mu <= c.p_max) c.verification.push_back(mu);
  }
  c.eps_pod = 1e-3;
  c.eps_eim = 5e-2;
  c.initial_hf = {1.0};
  c.grid_mode = GridMode::nodes;
  return c;
}

CaseConfig testcase_b() {
  CaseConfig c;
  c.id = "b";
  c.kappa0 = 1.0;
  c.phi_e = 3.0;
  c.u0 = 293.0;
  c.omega = 6.25e-3;
  c.final_time = 2.5;
  c.steps = 50;
  c.dt = 0.05;
  c.p_min = 1.0;
  c.p_max = 40.0;
  c.training = integer_range(1, 40);
  for (int i = 0; i <= 78; ++i) c.verification.push_back(1.0 + 0.5 * i);
  c.eps_pod = 5e-2;
  c.eps_eim = 1e-1;
  c.initial_hf = {21.0};
  c.grid_mode = GridMode::centroids;
  return c;
}

CaseConfig testcase(const std::string& id) {
  if (id == "a") return testcase_a();
  if (id == "b") return testcase_b();
  throw std::invalid_argument("unknown test case: " + id);
}

Nonlinearity case_nonlinearity(const CaseConfig& config) {
  Nonlinearity g;
  if (config.id == "a") {
    const double u0 = config.u0;
    const double span = config.u_m - config.u0;
    g.kind = Nonlinearity::Kind::solution;
    g.of_solution = [u0, span](double mu, double v) {
      const double s = (v - u0) / span;
      return std::sin(2.0 * M_PI * mu / 20.0 * s * s);
    };
  } else if (config.id == "b") {
    const double omega = config.omega;
    g.kind = Nonlinearity::Kind::gradient;
    g.of_gradient = [omega](double mu, double dx, double dy) {
      const double s = std::sin(omega * mu * (dx * dx + dy * dy));
      return s * s;
    };
  } else {
    throw std::invalid_argument("unknown test case: " + config.id);
  }
  return g;
}

HFModel build_model(const CaseConfig& config) {
  Mesh mesh = generate_perforated_plate(config.refine);
  const auto nodes = static_cast<Eigen::Index>(mesh.node_count());
  return HFModel(ModelData{
      .mesh = std::move(mesh),
      .grid_mode = config.grid_mode,
      .kappa0 = config.kappa0,
      .gamma = case_nonlinearity(config),
      .times = TimeGrid::uniform(config.steps, config.dt),
      .initial = Vector::Constant(nodes, config.u0),
      .flux = std::vector<double>(static_cast<std::size_t>(config.steps) + 1, config.phi_e),
      .source = {},
  });
}

double spacetime_error(const Trajectory& u, const Trajectory& v, const GramOperator& gram, const TimeGrid& times) {
  if (u.fields.size() != v.fields.size() || u.steps() != times.steps()) {
    throw std::invalid_argument("spacetime_error: trajectory lengths differ");
  }
  double total = 0.0;
  for (int k = 1; k <= times.steps(); ++k) {
    const auto& a = u.fields[static_cast<std::size_t>(k)];
    const auto& b = v.fields[static_cast<std::size_t>(k)];
    if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != gram.matrix.dimension()) {
      throw std::invalid_argument("spacetime_error: field dimension mismatch");
    }
    const Vector d = a - b;
    total += times.dt(k) * gram.inner(d, d);
  }
  return std::sqrt(std::max(0.0, total));
}

double eim_sup_error(const EimApprox& eim, const std::vector<Trajectory>& trajectories, const HFModel& model) {
  std::vector<double> worst(trajectories.size(), 0.0);
  parallel_for(trajectories.size(), [&](std::size_t p) {
    for (const auto& u : trajectories[p].fields) {
      const Vector r = eim_residual(eim, gamma_field(model, trajectories[p].mu, u));
      worst[p] = std::max(worst[p], r.cwiseAbs().maxCoeff());
    }
  });
  return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

AlgorithmRun run_standard(const HFModel& model, const std::vector<double>& training, double eps_pod, double eps_eim) {
  const auto start = Clock::now();
  AlgorithmRun run;
  run.algo = "standard";
  std::vector<Trajectory> trajectories(training.size());
  const auto hf_start = Clock::now();
  parallel_for(training.size(), [&](std::size_t i) { trajectories[i] = hf_solve(model, training[i]); });
  run.hf_seconds = seconds_since(hf_start);
  run.hf_solves = training.size();
  run.hf_parameters = training;

  const GramOperator gram = h1_gram(model);
  const RBasis basis = progressive_rb(trajectories, eps_pod, gram);
  StandardEimResult eim = standard_eim(model, trajectories, eps_eim);
  run.rom = reduce_operators(basis, model, gram, eim.eim);
  run.decay = std::move(eim.decay);
  run.provenance.assign(run.rom.eim.rank(), "hf");
  run.total_seconds = seconds_since(start);
  return run;
}

std::vector<std::size_t> initial_indices(const CaseConfig& config) {
  std::vector<std::size_t> out;
  for (double mu : config.initial_hf) {
    const auto it = std::find(config.training.begin(), config.training.end(), mu);
    if (it == config.training.end()) throw std::invalid_argument("initial HF parameter is not a training parameter");
    out.push_back(static_cast<std::size_t>(it - config.training.begin()));
  }
  if (out.empty()) out.push_back(0);
  return out;
}

AlgorithmRun run_algorithm(const HFModel& model, const CaseConfig& config, const std::string& algo,
                           bool rb_criterion) {
  if (algo == "standard") return run_standard(model, config.training, config.eps_pod, config.eps_eim);
  PreimOptions options;
  options.eps_pod = config.eps_pod;
  options.eps_eim = config.eps_eim;
  options.eps_rb = config.eps_rb;
  options.variant = variant_from_string(algo);
  options.rb_criterion = rb_criterion;
  options.initial_hf = initial_indices(config);
  const auto start = Clock::now();
  PreimResult result = preim_offline(model, config.training, options);
  AlgorithmRun run;
  run.algo = algo;
  run.total_seconds = seconds_since(start);
  run.rom = std::move(result.rom);
  run.hf_parameters = result.state.hf_parameters();
  run.hf_solves = result.state.hf_solves;
  run.hf_seconds = result.state.hf_seconds;
  run.decay = result.state.delta_eim;
  run.log = std::move(result.state.log);
  run.provenance = std::move(result.state.provenance);
  return run;
}

std::vector<VerificationRow> verification_errors(const ReducedModel& rom, const HFModel& model,
                                                 const std::vector<Trajectory>& truths, const GramOperator& gram) {
  std::vector<VerificationRow> rows(truths.size());
  const Trajectory zero{0.0, std::vector<Vector>(truths.empty() ? 0 : truths.front().fields.size(),
                                                 Vector::Zero(static_cast<Eigen::Index>(model.mesh().node_count())))};
  parallel_for(truths.size(), [&](std::size_t i) {
    const double mu = truths[i].mu;
    const Trajectory approx = reconstruct(rom.basis, online_solve(rom.ops, model.gamma(), mu), mu);
    rows[i] = {mu, spacetime_error(truths[i], approx, gram, model.times()),
               spacetime_error(truths[i], zero, gram, model.times())};
  });
  return rows;
}

ComparisonReport run_comparison(const CaseConfig& config, const std::vector<std::string>& algorithms,
                                const std::filesystem::path& out_dir) {
  const HFModel model = build_model(config);
  const GramOperator gram = h1_gram(model);
  ComparisonReport report;
  report.config = config;
  for (const auto& algo : algorithms) report.runs.push_back(run_algorithm(model, config, algo));

  std::vector<Trajectory> truths(config.verification.size());
  parallel_for(truths.size(), [&](std::size_t i) { truths[i] = hf_solve(model, config.verification[i]); });
  for (const auto& run : report.runs) report.errors.push_back(verification_errors(run.rom, model, truths, gram));
  if (!out_dir.empty()) write_report(report, out_dir);
  return report;
}

void write_report(const ComparisonReport& report, const std::filesystem::path& out_dir) {
  const AlgorithmRun* standard = nullptr;
  for (const auto& run : report.runs) {
    if (run.algo == "standard") standard = &run;
  }
  const double reference_count = static_cast<double>(report.config.training.size());
  auto percent = [&](double seconds) {
    return standard && standard->total_seconds > 0.0 ? format_double(100.0 * seconds / standard->total_seconds)
                                                     : std::string("nan");
  };

  for (std::size_t r = 0; r < report.runs.size(); ++r) {
    const AlgorithmRun& run = report.runs[r];
    const auto dir = out_dir / report.config.id / run.algo;
    std::filesystem::create_directories(dir);

    std::vector<std::vector<std::string>> decay;
    for (std::size_t m = 0; m < run.decay.size(); ++m) decay.push_back({std::to_string(m + 1), format_double(run.decay[m])});
    write_table_csv(dir / "eim_decay.csv", {"m", "residual"}, decay);

    if (run.log.empty()) {
      std::vector<std::vector<std::string>> rows;
      for (std::size_t m = 0; m < run.rom.eim.log.size(); ++m) {
        const auto& s = run.rom.eim.log[m];
        rows.push_back({std::to_string(m + 1), format_double(s.mu), std::to_string(s.k), std::to_string(s.point),
                        format_double(s.residual_norm)});
      }
      write_table_csv(dir / "selection.csv", {"m", "mu", "k", "point", "residual"}, rows);
    } else {
      write_iteration_log(run.log, dir / "selection.csv");
    }

    std::vector<std::vector<std::string>> errors;
    for (const auto& row : report.errors[r]) {
      errors.push_back({format_double(row.mu), format_double(row.error),
                        format_double(row.reference_norm > 0.0 ? row.error / row.reference_norm : 0.0)});
    }
    write_table_csv(dir / "errors_vs_mu.csv", {"mu", "error", "relative_error"}, errors);

    double max_error = 0.0;
    for (const auto& row : report.errors[r]) max_error = std::max(max_error, row.error);
    write_table_csv(dir / "summary.csv",
                    {"algo", "hf_count", "hf_count_pct", "hf_time_pct", "greedy_time_pct", "total_time_pct",
                     "hf_seconds", "total_seconds", "eim_rank", "basis_size", "max_error"},
                    {{run.algo, std::to_string(run.hf_parameters.size()),
                      format_double(100.0 * static_cast<double>(run.hf_parameters.size()) / reference_count),
                      percent(run.hf_seconds), percent(run.total_seconds - run.hf_seconds), percent(run.total_seconds),
                      format_double(run.hf_seconds), format_double(run.total_seconds),
                      std::to_string(run.rom.eim.rank()), std::to_string(run.rom.basis.size()),
                      format_double(max_error)}});
  }
}

}  // namespace preim
