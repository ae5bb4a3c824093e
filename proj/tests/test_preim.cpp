// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "preim/bench.hpp"
#include "preim/errors.hpp"
#include "preim/preim.hpp"
#include "test_support.hpp"

using namespace preim;
using preim::testing::case_model;
using preim::testing::small_model;

namespace {

struct CaseRuns {
  CaseConfig config;
  HFModel model;
  std::map<Variant, PreimResult> runs;
  explicit CaseRuns(const std::string& id) : config(testcase(id)), model(build_model(config)) {
    for (Variant v : {Variant::preim, Variant::preim_nr, Variant::user}) {
      PreimOptions options;
      options.eps_pod = config.eps_pod;
      options.eps_eim = config.eps_eim;
      options.eps_rb = config.eps_rb;
      options.variant = v;
      options.initial_hf = initial_indices(config);
      runs.emplace(v, preim_offline(model, config.training, options));
    }
  }
};

const CaseRuns& case_runs(const std::string& id) {
  static std::map<std::string, CaseRuns> cache;
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, CaseRuns(id)).first;
  return it->second;
}

std::vector<double> small_training() { return {1.0, 5.0, 10.0, 15.0, 20.0}; }

}  // namespace

TEST(Variant, StringRoundTrip) {
  for (Variant v : {Variant::preim, Variant::preim_nr, Variant::user}) EXPECT_EQ(variant_from_string(to_string(v)), v);
  EXPECT_STREQ(to_string(Variant::preim_nr), "preim-nr");
  EXPECT_THROW(variant_from_string("standard"), std::invalid_argument);
}

TEST(SurrogateField, SwitchesFromReducedToHighFidelity) {
  const HFModel model = case_model("a", 3);
  const PreimState state = init_preim(model, small_training(), {0}, 1e-3);
  const Trajectory known = surrogate_field(state, model, 0);
  const Trajectory& stored = state.hf_store.at(0);
  ASSERT_EQ(known.fields.size(), stored.fields.size());
  for (std::size_t k = 0; k < stored.fields.size(); ++k) EXPECT_EQ(known.fields[k], stored.fields[k]);

  const Trajectory reduced = surrogate_field(state, model, 4);
  const Trajectory oracle = reconstruct(state.basis, online_solve(state.rom.ops, model.gamma(), 20.0), 20.0);
  for (std::size_t k = 0; k < oracle.fields.size(); ++k) EXPECT_EQ(reduced.fields[k], oracle.fields[k]);

  PreimState grown = state;
  grown.hf_store.emplace(4, hf_solve(model, 20.0));
  grown.hf_order.push_back(4);
  const Trajectory switched = surrogate_field(grown, model, 4);
  const Trajectory hf = hf_solve(model, 20.0);
  for (std::size_t k = 0; k < hf.fields.size(); ++k) EXPECT_EQ(switched.fields[k], hf.fields[k]);
  EXPECT_GT((switched.fields.back() - reduced.fields.back()).norm(), 0.0);
}

TEST(InitPreim, CaseAStartsFromTheFirstParameter) {
  const CaseConfig config = testcase_a();
  const HFModel model = build_model(config);
  const PreimState state = init_preim(model, config.training, {0}, config.eps_pod);
  EXPECT_EQ(state.eim.rank(), 1u);
  EXPECT_EQ(state.hf_store.size(), 1u);
  EXPECT_EQ(state.hf_solves, 1u);
  ASSERT_EQ(state.log.size(), 1u);
  EXPECT_EQ(state.log[0].mu, 1.0);
  EXPECT_EQ(state.log[0].k, 50);
  EXPECT_GE(state.basis.size(), 1u);
  EXPECT_LE(orthonormality_defect(state.basis, state.gram), 1e-10);
}

TEST(InitPreim, ConstantNonlinearityGivesUnitFunction) {
  const HFModel model = small_model(2, GridMode::nodes, Nonlinearity::constant(0.4), 1.0, 5, 0.1, 1.0, 1.0);
  const PreimState state = init_preim(model, {1.0, 2.0}, {0}, 1e-3);
  ASSERT_EQ(state.eim.rank(), 1u);
  EXPECT_LE((state.eim.q.col(0).array() - 1.0).abs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(state.delta_eim.front(), 0.4);
}

TEST(InitPreim, FullInitialSetMatchesStandardStart) {
  const CaseConfig config = testcase_a();
  const HFModel model = case_model("a", 4);
  std::vector<std::size_t> all(config.training.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const PreimState state = init_preim(model, config.training, all, config.eps_pod);
  std::vector<Trajectory> ts;
  for (double mu : config.training) ts.push_back(hf_solve(model, mu));
  const StandardEimResult standard = standard_eim(model, ts, config.eps_eim);
  EXPECT_EQ(state.eim.points.front(), standard.eim.points.front());
  EXPECT_EQ(state.eim.log.front().mu, standard.eim.log.front().mu);
  EXPECT_EQ(state.eim.log.front().k, standard.eim.log.front().k);
  EXPECT_EQ(state.eim.q.col(0), standard.eim.q.col(0));
  const RBasis progressive = progressive_rb(ts, config.eps_pod, h1_gram(model));
  EXPECT_EQ(state.basis.size(), progressive.size());
}

TEST(InitPreim, InvalidInitialSet) {
  const HFModel model = case_model("a", 2);
  EXPECT_THROW(init_preim(model, small_training(), {}, 1e-3), std::invalid_argument);
  EXPECT_THROW(init_preim(model, small_training(), {9}, 1e-3), std::invalid_argument);
}

TEST(UpdateEim, KnownParameterNeedsNoSolve) {
  const HFModel model = case_model("a", 3);
  PreimState state = init_preim(model, {20.0}, {0}, 1e-3);
  const UpdateEimResult r = update_eim(state, model, 1e-3, Variant::preim);
  EXPECT_TRUE(r.new_trajectories.empty());
  EXPECT_EQ(state.hf_solves, 1u);
  EXPECT_EQ(state.hf_store.size(), 1u);
  EXPECT_FALSE(state.log.back().new_hf);
  EXPECT_EQ(state.log.back().mu, 20.0);
}

TEST(UpdateEim, TiesPreferParametersWithoutHighFidelityData) {
  // A constant nonlinearity is captured exactly by the first function, so every
  // residual is zero and all candidates tie.
  const HFModel model = small_model(2, GridMode::nodes, Nonlinearity::constant(0.4), 1.0, 5, 0.1, 1.0, 1.0);
  for (Variant v : {Variant::preim, Variant::preim_nr, Variant::user}) {
    PreimState state = init_preim(model, {1.0, 2.0, 3.0}, {0}, 1e-3);
    const UpdateEimResult r = update_eim(state, model, 1e-3, v);
    EXPECT_EQ(state.log.back().mu, 2.0) << to_string(v);
    EXPECT_TRUE(state.log.back().new_hf);
    EXPECT_FALSE(r.incr_rk);
    EXPECT_EQ(r.new_trajectories.size(), 1u);
    EXPECT_EQ(state.eim.rank(), 1u);
  }
}

TEST(UpdateEim, ResidualAboveToleranceExtendsTheInterpolation) {
  const HFModel model = case_model("a", 3);
  PreimState state = init_preim(model, small_training(), {0}, 1e-3);
  const UpdateEimResult r = update_eim(state, model, 1e-6, Variant::preim);
  EXPECT_TRUE(r.incr_rk);
  EXPECT_EQ(state.eim.rank(), 2u);
  EXPECT_EQ(state.provenance.back(), "hf");
  EXPECT_DOUBLE_EQ(r.delta_eim, state.log.back().r_bar);
  EXPECT_EQ(state.eim.log.back().mu, state.log.back().mu_bar);
}

TEST(ErrorEstimator, NonNegativeOnTheBenchmark) {
  const CaseConfig config = testcase_a();
  const HFModel model = case_model("a", 3);
  const PreimState state = init_preim(model, config.training, {0}, config.eps_pod);
  for (double mu : {1.0, 7.0, 20.0}) {
    const double d = error_estimator(state, model, mu);
    EXPECT_GE(d, 0.0);
    EXPECT_TRUE(std::isfinite(d));
  }
  EXPECT_GT(error_estimator(state, model, 20.0), 0.0);
}

TEST(ErrorEstimator, ZeroData) {
  const HFModel model = small_model(2, GridMode::nodes, Nonlinearity::constant(0.2), 1.0, 6, 0.1, 0.0, 0.0);
  PreimState state = init_preim(model, {1.0, 2.0}, {0}, 1e-3);
  // The zero trajectory has no POD modes; use any basis.
  state.basis = pod({Vector::LinSpaced(model.initial().size(), 0.0, 1.0)}, 1e-3, state.gram, PodThreshold::relative).basis;
  refresh_rom(state, model);
  EXPECT_EQ(error_estimator(state, model, 1.5), 0.0);
}

TEST(ErrorEstimator, VanishesWhenTheReductionIsExact) {
  const HFModel model = small_model(3, GridMode::nodes, Nonlinearity::constant(0.3), 1.0, 20, 0.1, 0.0, 2.0);
  PreimState state = init_preim(model, {1.0}, {0}, 1e-3);
  state.basis = pod(state.hf_store.at(0).fields, 1e-12, state.gram, PodThreshold::relative).basis;
  refresh_rom(state, model);
  EXPECT_LE(error_estimator(state, model, 1.0), 1e-8);
}

TEST(PreimOffline, CaseAHighFidelityBudget) {
  const auto& d = case_runs("a");
  const PreimResult& r = d.runs.at(Variant::preim);
  EXPECT_LE(r.state.hf_store.size(), 6u);
  EXPECT_GE(r.state.eim.rank(), 5u);
  EXPECT_LE(r.state.delta_eim.back(), d.config.eps_eim);
}

TEST(PreimOffline, CaseBHighFidelityBudget) {
  const auto& d = case_runs("b");
  const PreimResult& r = d.runs.at(Variant::preim);
  EXPECT_GE(r.state.hf_store.size(), 2u);
  EXPECT_LE(r.state.hf_store.size(), 6u);
  EXPECT_GE(r.state.eim.rank(), 6u);
  EXPECT_LE(r.state.eim.rank(), 15u);
}

TEST(PreimOffline, HugeToleranceStopsAfterInit) {
  const CaseConfig config = testcase_a();
  const HFModel model = case_model("a", 3);
  PreimOptions options;
  options.eps_eim = 1e9;
  const PreimResult r = preim_offline(model, config.training, options);
  EXPECT_EQ(r.state.eim.rank(), 1u);
  EXPECT_EQ(r.state.hf_store.size(), 1u);
  EXPECT_EQ(r.rom.ops.rank(), 1u);
}

TEST(PreimOffline, IterationCapRaisesNonTermination) {
  const CaseConfig config = testcase_a();
  const HFModel model = case_model("a", 3);
  PreimOptions options;
  options.eps_eim = 1e-6;
  options.iteration_cap = 2;
  try {
    preim_offline(model, config.training, options);
    FAIL() << "expected NonTermination";
  } catch (const NonTermination& e) {
    EXPECT_NE(e.diagnostic().find("update"), std::string::npos);
  }
}

TEST(PreimOffline, InvalidThresholds) {
  const HFModel model = case_model("a", 2);
  PreimOptions options;
  options.eps_pod = 0.0;
  EXPECT_THROW(preim_offline(model, small_training(), options), std::invalid_argument);
}

TEST(PreimOffline, RbCriterionRecordsEstimatorValues) {
  const CaseConfig config = testcase_a();
  const HFModel model = case_model("a", 3);
  PreimOptions options;
  options.eps_eim = config.eps_eim;
  options.rb_criterion = true;
  options.eps_rb = 1e9;
  const PreimResult r = preim_offline(model, config.training, options);
  EXPECT_FALSE(r.state.delta_rb.empty());
  for (double v : r.state.delta_rb) EXPECT_GE(v, 0.0);
  EXPECT_LE(r.state.delta_eim.back(), config.eps_eim);
}

TEST(PreimOffline, StateInvariants) {
  for (const char* id : {"a", "b"}) {
    const auto& d = case_runs(id);
    for (const auto& [variant, r] : d.runs) {
      const PreimState& s = r.state;
      const std::string tag = std::string(id) + "/" + to_string(variant);
      // hf_store keys are exactly P_HF, each solved once.
      std::set<std::size_t> keys;
      for (const auto& kv : s.hf_store) keys.insert(kv.first);
      EXPECT_EQ(keys, std::set<std::size_t>(s.hf_order.begin(), s.hf_order.end())) << tag;
      EXPECT_EQ(s.hf_order.size(), s.hf_store.size()) << tag;
      EXPECT_EQ(s.hf_solves, s.hf_store.size()) << tag;
      // Logged HF parameters are exactly P_HF.
      std::set<double> logged;
      for (const auto& it : s.log)
        if (it.new_hf) logged.insert(it.mu);
      const std::vector<double> params = s.hf_parameters();
      EXPECT_EQ(logged, std::set<double>(params.begin(), params.end())) << tag;
      std::size_t initial = initial_indices(d.config).size();
      EXPECT_LE(s.hf_solves, initial + s.log.size() - 1) << tag;
      // Monotone knowledge.
      for (std::size_t i = 1; i < s.log.size(); ++i) {
        EXPECT_GE(s.log[i].hf_count, s.log[i - 1].hf_count) << tag;
        EXPECT_GE(s.log[i].m, s.log[i - 1].m) << tag;
        EXPECT_GE(s.log[i].basis_size, s.log[i - 1].basis_size) << tag;
      }
      // Rank bookkeeping and termination.
      std::size_t accepted = 1;
      for (const auto& it : s.log)
        if (it.event == "update" && it.incr_rk) ++accepted;
      EXPECT_EQ(accepted, s.eim.rank()) << tag;
      EXPECT_EQ(s.provenance.size(), s.eim.rank()) << tag;
      EXPECT_LE(s.log.back().delta_eim, d.config.eps_eim) << tag;
      for (const auto& it : s.log)
        if (it.incr_rk) EXPECT_GE(it.delta_eim, d.config.eps_eim) << tag;
      // Card(P_HF) <= m + Card(P_HF_1) - 1 for UPDATE_EIM steps.
      std::size_t estimator = 0;
      for (const auto& it : s.log) {
        if (it.event == "estimator") ++estimator;
        if (it.event == "update") EXPECT_LE(it.hf_count, it.m + initial - 1 + estimator) << tag;
      }
      // Variant separation.
      if (variant != Variant::user) {
        for (const auto& p : s.provenance) EXPECT_EQ(p, "hf") << tag;
      }
      if (variant != Variant::preim) {
        for (const auto& it : s.log) EXPECT_FALSE(it.reselected) << tag;
      }
      EXPECT_LE(orthonormality_defect(s.basis, s.gram), 1e-10) << tag;
    }
  }
}

TEST(PreimOffline, InterpolationIsExactOnSelectedHighFidelitySamples) {
  const auto& d = case_runs("a");
  for (Variant v : {Variant::preim, Variant::preim_nr}) {
    const PreimState& s = d.runs.at(v).state;
    std::map<double, std::size_t> index;
    for (std::size_t i = 0; i < s.training.size(); ++i) index[s.training[i]] = i;
    for (const auto& it : s.log) {
      if (it.event != "update" && it.event != "init") continue;
      const auto found = s.hf_store.find(index.at(it.mu_bar));
      ASSERT_NE(found, s.hf_store.end());
      const Vector g = gamma_field(d.model, it.mu_bar, found->second.fields[static_cast<std::size_t>(it.k_bar)]);
      const Vector r = eim_residual(s.eim, g);
      for (std::size_t x : s.eim.points)
        EXPECT_LE(std::abs(r[static_cast<Eigen::Index>(x)]), 1e-12 * (1.0 + g.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(PreimOffline, ReducedModelMatchesState) {
  const auto& d = case_runs("a");
  for (const auto& [variant, r] : d.runs) {
    EXPECT_EQ(r.rom.ops.rank(), r.state.eim.rank());
    EXPECT_EQ(r.rom.ops.basis_size(), r.state.basis.size());
    EXPECT_EQ(r.rom.eim.points, r.state.eim.points);
  }
}

TEST(PreimOffline, Deterministic) {
  const CaseConfig config = testcase_a();
  const HFModel model = case_model("a", 4);
  PreimOptions options;
  const PreimResult a = preim_offline(model, config.training, options);
  const PreimResult b = preim_offline(model, config.training, options);
  EXPECT_EQ(a.state.eim.points, b.state.eim.points);
  EXPECT_EQ(a.state.hf_order, b.state.hf_order);
  EXPECT_EQ(a.rom.ops.mass, b.rom.ops.mass);
}

TEST(IterationLog, CsvLayout) {
  const auto& d = case_runs("a");
  const auto path = std::filesystem::temp_directory_path() / "preim_test_log.csv";
  const auto& log = d.runs.at(Variant::preim).state.log;
  write_iteration_log(log, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("m,mu,k,mu_bar,k_bar,new_hf,delta_eim,N,card_p_hf", 0), 0u);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, log.size());
  std::filesystem::remove(path);
}
