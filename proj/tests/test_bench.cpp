// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "preim/bench.hpp"
#include "preim/csv.hpp"
#include "test_support.hpp"

using namespace preim;
using preim::testing::case_model;
using preim::testing::random_vector;

namespace fs = std::filesystem;

namespace {

Trajectory constant_trajectory(Eigen::Index nodes, int steps, double c) {
  return Trajectory{0.0, std::vector<Vector>(static_cast<std::size_t>(steps) + 1, Vector::Constant(nodes, c))};
}

Trajectory random_trajectory(std::mt19937& rng, Eigen::Index nodes, int steps) {
  Trajectory t;
  for (int k = 0; k <= steps; ++k) t.fields.push_back(random_vector(rng, nodes));
  return t;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      cells.push_back(line.substr(start, pos - start));
    cells.push_back(line.substr(start));
    rows.push_back(cells);
  }
  return rows;
}

const ComparisonReport& case_a_report() {
  static const ComparisonReport report = [] {
    const fs::path dir = fs::temp_directory_path() / "preim_test_bench_report";
    fs::remove_all(dir);
    return run_comparison(testcase_a(), {"standard", "preim", "preim-nr", "user"}, dir);
  }();
  return report;
}

fs::path report_dir() { return fs::temp_directory_path() / "preim_test_bench_report"; }

std::size_t run_index(const ComparisonReport& r, const std::string& algo) {
  for (std::size_t i = 0; i < r.runs.size(); ++i)
    if (r.runs[i].algo == algo) return i;
  throw std::runtime_error("missing run " + algo);
}

}  // namespace

TEST(CaseConfig, CaseAConstants) {
  const CaseConfig c = testcase_a();
  EXPECT_EQ(c.id, "a");
  EXPECT_EQ(c.kappa0, 1.05);
  EXPECT_EQ(c.phi_e, 3.0);
  EXPECT_EQ(c.u0, 293.0);
  EXPECT_EQ(c.u_m, 323.0);
  EXPECT_EQ(c.steps, 50);
  EXPECT_EQ(c.dt, 0.1);
  EXPECT_EQ(c.final_time, 5.0);
  EXPECT_NEAR(c.dt * c.steps, c.final_time, 1e-12);
  EXPECT_EQ(c.p_min, 1.0);
  EXPECT_EQ(c.p_max, 20.0);
  ASSERT_EQ(c.training.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(c.training[i], static_cast<double>(i + 1));
  ASSERT_EQ(c.verification.size(), 77u);
  EXPECT_EQ(c.verification.front(), 1.0);
  EXPECT_EQ(c.verification.back(), 20.0);
  EXPECT_EQ(c.eps_pod, 1e-3);
  EXPECT_EQ(c.eps_eim, 5e-2);
  EXPECT_EQ(c.grid_mode, GridMode::nodes);
}

TEST(CaseConfig, CaseBConstants) {
  const CaseConfig c = testcase_b();
  EXPECT_EQ(c.id, "b");
  EXPECT_EQ(c.kappa0, 1.0);
  EXPECT_EQ(c.phi_e, 3.0);
  EXPECT_EQ(c.u0, 293.0);
  EXPECT_EQ(c.omega, 6.25e-3);
  EXPECT_EQ(c.steps, 50);
  EXPECT_EQ(c.dt, 0.05);
  EXPECT_EQ(c.final_time, 2.5);
  EXPECT_NEAR(c.dt * c.steps, c.final_time, 1e-12);
  ASSERT_EQ(c.training.size(), 40u);
  EXPECT_EQ(c.training.front(), 1.0);
  EXPECT_EQ(c.training.back(), 40.0);
  ASSERT_EQ(c.verification.size(), 79u);
  EXPECT_EQ(c.verification[1], 1.5);
  EXPECT_EQ(c.verification.back(), 40.0);
  EXPECT_EQ(c.eps_pod, 5e-2);
  EXPECT_EQ(c.eps_eim, 1e-1);
  EXPECT_EQ(c.grid_mode, GridMode::centroids);
  EXPECT_THROW(testcase("c"), std::invalid_argument);
}

TEST(CaseConfig, NonlinearityFormulas) {
  const Nonlinearity a = case_nonlinearity(testcase_a());
  for (double mu : {1.0, 7.5, 20.0}) EXPECT_EQ(a.of_solution(mu, 293.0), 0.0);
  EXPECT_NEAR(a.of_solution(5.0, 323.0), 1.0, 1e-15);
  const Nonlinearity b = case_nonlinearity(testcase_b());
  EXPECT_EQ(b.of_gradient(30.0, 0.0, 0.0), 0.0);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> g(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double v = b.of_gradient(1.0 + i % 40, g(rng), g(rng));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(CaseConfig, BuiltModelMatchesConfig) {
  CaseConfig c = testcase_b();
  c.refine = 2;
  const HFModel m = build_model(c);
  EXPECT_EQ(m.grid_mode(), GridMode::centroids);
  EXPECT_EQ(m.steps(), 50);
  EXPECT_EQ(m.kappa0(), 1.0);
  EXPECT_EQ(m.flux(7), 3.0);
  EXPECT_EQ(m.initial().minCoeff(), 293.0);
  EXPECT_EQ(m.initial().maxCoeff(), 293.0);
}

TEST(SpacetimeError, IdenticalTrajectoriesGiveZero) {
  const HFModel model = case_model("a", 2);
  const Trajectory t = hf_solve(model, 3.0);
  EXPECT_EQ(spacetime_error(t, t, h1_gram(model), model.times()), 0.0);
}

TEST(SpacetimeError, ConstantAgainstZero) {
  const HFModel model = case_model("a", 2);
  const auto n = static_cast<Eigen::Index>(model.mesh().node_count());
  const double c = 2.5;
  const double e = spacetime_error(constant_trajectory(n, 50, c), constant_trajectory(n, 50, 0.0), h1_gram(model), model.times());
  EXPECT_NEAR(e, c * std::sqrt(5.0 * 12.0), 1e-10);
}

TEST(SpacetimeError, TriangleInequality) {
  const HFModel model = case_model("a", 2);
  const auto n = static_cast<Eigen::Index>(model.mesh().node_count());
  const GramOperator gram = h1_gram(model);
  std::mt19937 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Trajectory a = random_trajectory(rng, n, 50);
    const Trajectory b = random_trajectory(rng, n, 50);
    const Trajectory c = random_trajectory(rng, n, 50);
    EXPECT_LE(spacetime_error(a, c, gram, model.times()),
              spacetime_error(a, b, gram, model.times()) + spacetime_error(b, c, gram, model.times()) + 1e-12);
    EXPECT_NEAR(spacetime_error(a, b, gram, model.times()), spacetime_error(b, a, gram, model.times()), 1e-12);
  }
}

TEST(SpacetimeError, MismatchThrows) {
  const HFModel model = case_model("a", 2);
  const auto n = static_cast<Eigen::Index>(model.mesh().node_count());
  const GramOperator gram = h1_gram(model);
  EXPECT_THROW(spacetime_error(constant_trajectory(n, 50, 1.0), constant_trajectory(n, 49, 1.0), gram, model.times()),
               std::invalid_argument);
  EXPECT_THROW(spacetime_error(constant_trajectory(n, 50, 1.0), constant_trajectory(n - 1, 50, 1.0), gram, model.times()),
               std::invalid_argument);
}

TEST(EimSupError, RankZeroIsTheSupOfGamma) {
  const HFModel model = case_model("a", 3);
  std::vector<Trajectory> ts = {hf_solve(model, 4.0), hf_solve(model, 17.0)};
  double sup = 0.0;
  for (const auto& t : ts)
    for (const auto& u : t.fields) sup = std::max(sup, gamma_field(model, t.mu, u).cwiseAbs().maxCoeff());
  EXPECT_EQ(eim_sup_error(empty_eim(model.grid().size()), ts, model), sup);
}

TEST(EimSupError, SeparableNonlinearityIsCapturedExactly) {
  // Gamma(mu, u) = mu / 20 does not vary in space: one unit function reproduces it.
  Nonlinearity g;
  g.kind = Nonlinearity::Kind::solution;
  g.of_solution = [](double mu, double) { return mu / 20.0; };
  const HFModel model = preim::testing::small_model(2, GridMode::nodes, g, 1.0, 5, 0.1, 293.0, 3.0);
  std::vector<Trajectory> ts = {hf_solve(model, 2.0), hf_solve(model, 9.0)};
  const StandardEimResult r = standard_eim(model, ts, 1e-10);
  EXPECT_EQ(r.eim.rank(), 1u);
  EXPECT_LE(eim_sup_error(r.eim, ts, model), 1e-12);
}

TEST(EimSupError, DecaysWithRankOnCaseA) {
  const CaseConfig config = testcase_a();
  const HFModel model = build_model(config);
  std::vector<Trajectory> ts;
  for (double mu : config.training) ts.push_back(hf_solve(model, mu));
  const StandardEimResult r = standard_eim(model, ts, 1e-3);
  std::vector<double> errors;
  for (std::size_t m = 0; m <= r.eim.rank(); ++m) errors.push_back(eim_sup_error(truncate(r.eim, m), ts, model));
  // The greedy error at rank m is exactly the next selected residual.
  for (std::size_t m = 0; m <= r.eim.rank(); ++m) EXPECT_NEAR(errors[m], r.decay[m], 1e-12);
  EXPECT_LE(errors.back(), 1e-3);
  EXPECT_LE(errors.back(), 1e-3 * errors.front() * 10.0);
  std::size_t increases = 0;
  for (std::size_t m = 1; m < errors.size(); ++m)
    if (errors[m] > errors[m - 1]) ++increases;
  EXPECT_LE(increases, errors.size() / 3);
}

TEST(RunComparison, WritesEveryAlgorithmDirectory) {
  const ComparisonReport& r = case_a_report();
  ASSERT_EQ(r.runs.size(), 4u);
  for (const char* algo : {"standard", "preim", "preim-nr", "user"}) {
    for (const char* file : {"eim_decay.csv", "selection.csv", "errors_vs_mu.csv", "summary.csv"})
      EXPECT_TRUE(fs::exists(report_dir() / "a" / algo / file)) << algo << "/" << file;
    const auto errors = read_rows(report_dir() / "a" / algo / "errors_vs_mu.csv");
    EXPECT_EQ(errors.size(), 78u);
    EXPECT_EQ(errors.front(), (std::vector<std::string>{"mu", "error", "relative_error"}));
  }
}

TEST(RunComparison, SummaryIsNormalizedToStandard) {
  case_a_report();
  const auto standard = read_rows(report_dir() / "a" / "standard" / "summary.csv");
  ASSERT_EQ(standard.size(), 2u);
  EXPECT_EQ(standard[0][0], "algo");
  EXPECT_EQ(standard[0][2], "hf_count_pct");
  EXPECT_EQ(standard[1][1], "20");
  EXPECT_EQ(std::stod(standard[1][2]), 100.0);
  EXPECT_EQ(std::stod(standard[1][5]), 100.0);
  const auto preim = read_rows(report_dir() / "a" / "preim" / "summary.csv");
  const double pct = std::stod(preim[1][2]);
  EXPECT_LE(pct, 35.0);
  EXPECT_NEAR(pct, 100.0 * std::stod(preim[1][1]) / 20.0, 1e-12);
}

TEST(RunComparison, EveryAlgorithmMeetsTheEimTolerance) {
  const ComparisonReport& r = case_a_report();
  for (const auto& run : r.runs) {
    ASSERT_FALSE(run.decay.empty()) << run.algo;
    EXPECT_LE(run.decay.back(), r.config.eps_eim) << run.algo;
  }
}

TEST(RunComparison, StandardAndPreimAgreeAcrossTheRange) {
  const ComparisonReport& r = case_a_report();
  const auto& standard = r.errors[run_index(r, "standard")];
  const auto& preim = r.errors[run_index(r, "preim")];
  ASSERT_EQ(standard.size(), preim.size());
  for (std::size_t i = 0; i < standard.size(); ++i) {
    EXPECT_EQ(standard[i].mu, preim[i].mu);
    EXPECT_LE(preim[i].error, 10.0 * standard[i].error) << standard[i].mu;
    EXPECT_LE(standard[i].error, 10.0 * preim[i].error) << standard[i].mu;
  }
}

TEST(RunComparison, ReducedBasisUpdatesStayComparableForUser) {
  const ComparisonReport& r = case_a_report();
  const auto& preim = r.errors[run_index(r, "preim")];
  const auto& user = r.errors[run_index(r, "user")];
  double preim_max = 0.0;
  double user_max = 0.0;
  for (std::size_t i = 0; i < preim.size(); ++i) {
    EXPECT_LE(user[i].error, 10.0 * preim[i].error) << preim[i].mu;
    preim_max = std::max(preim_max, preim[i].error);
    user_max = std::max(user_max, user[i].error);
  }
  EXPECT_LE(user_max, 3.0 * preim_max);
  EXPECT_LE(preim_max, 3.0 * user_max);
}

TEST(RunComparison, NoOutputDirectoryWritesNothing) {
  CaseConfig c = testcase_a();
  c.refine = 2;
  c.verification = {1.0, 20.0};
  const ComparisonReport r = run_comparison(c, {"preim"}, {});
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_EQ(r.errors[0].size(), 2u);
  EXPECT_THROW(run_comparison(c, {"nope"}, {}), std::invalid_argument);
}

TEST(RunAlgorithm, StandardUsesEveryTrainingParameter) {
  CaseConfig c = testcase_a();
  c.refine = 3;
  const HFModel model = build_model(c);
  const AlgorithmRun run = run_algorithm(model, c, "standard");
  EXPECT_EQ(run.hf_solves, 20u);
  EXPECT_EQ(run.hf_parameters, c.training);
  EXPECT_TRUE(run.log.empty());
  EXPECT_EQ(run.decay.size(), run.rom.eim.rank() + 1);
  EXPECT_EQ(initial_indices(c), (std::vector<std::size_t>{0}));
  EXPECT_EQ(initial_indices(testcase_b()), (std::vector<std::size_t>{20}));
}
