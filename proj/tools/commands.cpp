// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "preim/archive.hpp"
#include "preim/bench.hpp"
#include "preim/csv.hpp"
#include "preim/errors.hpp"

namespace preim::cli {
namespace {

namespace fs = std::filesystem;

struct OfflineArgs {
  std::string case_id;
  std::string algo = "preim";
  int refine = 10;
  std::optional<double> eps_pod;
  std::optional<double> eps_eim;
  std::optional<double> eps_rb;
  std::string rb_criterion = "off";
  std::vector<double> init_params;
  std::string out;
};

struct OnlineArgs {
  std::string rom;
  double mu = 0.0;
  bool reconstruct = false;
  std::string out;
};

struct ReportArgs {
  std::string case_id;
  std::vector<std::string> algos;
  std::string out;
  int refine = 10;
};

// Raised for semantically invalid flag values that CLI11 cannot see.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

CaseConfig configure(const std::string& case_id, int refine) {
  if (refine < 1) throw UsageError("--refine must be a positive integer");
  CaseConfig config = testcase(case_id);
  config.refine = refine;
  return config;
}

std::string mu_label(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", mu);
  return buf;
}

// One row per time node, one column per reduced coordinate.
void write_reduced(std::ostream& os, const ReducedTrajectory& c) {
  for (const auto& row : c) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (j) os << ',';
      os << format_double(row[j]);
    }
    os << '\n';
  }
}

int offline(const OfflineArgs& args, std::ostream& out) {
  CaseConfig config = configure(args.case_id, args.refine);
  if (args.eps_pod) config.eps_pod = *args.eps_pod;
  if (args.eps_eim) config.eps_eim = *args.eps_eim;
  if (args.eps_rb) config.eps_rb = *args.eps_rb;
  if (!(config.eps_pod > 0.0) || !(config.eps_eim > 0.0) || !(config.eps_rb > 0.0)) {
    throw UsageError("thresholds must be positive");
  }
  if (!args.init_params.empty()) config.initial_hf = args.init_params;
  try {
    initial_indices(config);
  } catch (const std::invalid_argument&) {
    throw UsageError("--init-params must list training parameters");
  }

  const HFModel model = build_model(config);
  const AlgorithmRun run = run_algorithm(model, config, args.algo, args.rb_criterion == "on");

  Manifest manifest = case_manifest(config);
  manifest["algo"] = args.algo;
  manifest["eps_pod"] = format_double(config.eps_pod);
  manifest["eps_eim"] = format_double(config.eps_eim);
  manifest["eps_rb"] = format_double(config.eps_rb);
  manifest["rb_criterion"] = args.rb_criterion;
  manifest["hf_count"] = std::to_string(run.hf_parameters.size());
  const fs::path dir(args.out);
  save_archive(dir, run.rom, manifest);

  std::vector<std::vector<std::string>> decay;
  for (std::size_t m = 0; m < run.decay.size(); ++m) decay.push_back({std::to_string(m + 1), format_double(run.decay[m])});
  write_table_csv(dir / "eim_decay.csv", {"m", "residual"}, decay);
  if (!run.log.empty()) write_iteration_log(run.log, dir / "selection.csv");
  std::vector<std::vector<std::string>> hf;
  for (double mu : run.hf_parameters) hf.push_back({format_double(mu)});
  write_table_csv(dir / "hf_parameters.csv", {"mu"}, hf);

  out << "case=" << config.id << " algo=" << args.algo << " N=" << run.rom.basis.size()
      << " M=" << run.rom.eim.rank() << " hf=" << run.hf_parameters.size() << " archive=" << dir.string() << '\n';
  return kSuccess;
}

int online(const OnlineArgs& args, std::ostream& out, std::ostream& err) {
  const RomArchive archive = load_archive(args.rom, args.reconstruct);
  const CaseConfig config = archive_case(archive);
  if (args.mu < config.p_min || args.mu > config.p_max) {
    err << "warning: mu=" << mu_label(args.mu) << " lies outside the parameter range [" << mu_label(config.p_min)
        << ", " << mu_label(config.p_max) << "]\n";
  }
  const ReducedTrajectory c = online_solve(archive.ops, case_nonlinearity(config), args.mu);
  if (args.out.empty()) {
    write_reduced(out, c);
  } else {
    std::ofstream file(args.out);
    if (!file) throw std::runtime_error("cannot write " + args.out);
    write_reduced(file, c);
  }
  if (args.reconstruct) {
    RBasis basis;
    basis.modes = *archive.basis;
    const fs::path target = (args.out.empty() ? fs::path(".") : fs::path(args.out).parent_path()) /
                            ("traj_mu" + mu_label(args.mu) + ".csv");
    write_trajectory_csv(reconstruct(basis, c, args.mu), target);
  }
  return kSuccess;
}

int report(const ReportArgs& args, std::ostream& out) {
  const CaseConfig config = configure(args.case_id, args.refine);
  for (const auto& algo : args.algos) {
    if (algo != "standard" && algo != "preim" && algo != "preim-nr" && algo != "user") {
      throw UsageError("unknown algorithm " + algo);
    }
  }
  const ComparisonReport result = run_comparison(config, args.algos, args.out);
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    double worst = 0.0;
    for (const auto& row : result.errors[r]) worst = std::max(worst, row.error);
    out << result.runs[r].algo << ": hf=" << result.runs[r].hf_parameters.size() << " N=" << result.runs[r].rom.basis.size()
        << " M=" << result.runs[r].rom.eim.rank() << " max_error=" << format_double(worst) << '\n';
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Progressive reduced-basis / empirical-interpolation model reduction"};
  app.name("preim");
  app.require_subcommand(1);

  OfflineArgs off;
  auto* cmd_off = app.add_subcommand("offline", "Build a reduced model and save it as an archive");
  cmd_off->add_option("--case", off.case_id, "Test case")->required()->check(CLI::IsMember({"a", "b"}));
  cmd_off->add_option("--algo", off.algo, "Offline algorithm")
      ->check(CLI::IsMember({"standard", "preim", "preim-nr", "user"}));
  cmd_off->add_option("--refine", off.refine, "Mesh cells per unit length");
  cmd_off->add_option("--eps-pod", off.eps_pod, "POD threshold");
  cmd_off->add_option("--eps-eim", off.eps_eim, "EIM threshold");
  cmd_off->add_option("--eps-rb", off.eps_rb, "Reduced-basis estimator threshold");
  cmd_off->add_option("--rb-criterion", off.rb_criterion, "Include the estimator in the stopping test")
      ->check(CLI::IsMember({"on", "off"}));
  cmd_off->add_option("--init-params", off.init_params, "Initial HF parameters")->delimiter(',');
  cmd_off->add_option("--out", off.out, "Archive directory")->required();

  OnlineArgs on;
  auto* cmd_on = app.add_subcommand("online", "Solve the reduced model for one parameter");
  cmd_on->add_option("--rom", on.rom, "Archive directory")->required();
  cmd_on->add_option("--mu", on.mu, "Parameter value")->required();
  cmd_on->add_flag("--reconstruct", on.reconstruct, "Also write the nodal trajectory");
  cmd_on->add_option("--out", on.out, "Reduced trajectory file (stdout when absent)");

  ReportArgs rep;
  auto* cmd_rep = app.add_subcommand("report", "Compare offline algorithms on a test case");
  cmd_rep->add_option("--case", rep.case_id, "Test case")->required()->check(CLI::IsMember({"a", "b"}));
  cmd_rep->add_option("--algos", rep.algos, "Algorithms to compare")->required()->delimiter(',');
  cmd_rep->add_option("--out", rep.out, "Report directory")->required();
  cmd_rep->add_option("--refine", rep.refine, "Mesh cells per unit length");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (cmd_off->parsed()) return offline(off, out);
    if (cmd_on->parsed()) return online(on, out, err);
    return report(rep, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NonTermination& e) {
    err << "error: " << e.what() << '\n' << e.diagnostic();
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace preim::cli
