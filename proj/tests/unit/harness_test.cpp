// Copyright 2026 The dpeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpeq/checks.hpp"
#include "dpeq/error.hpp"
#include "dpeq/graph_gen.hpp"
#include "dpeq/harness.hpp"
#include "test_util.hpp"

namespace dpeq {
namespace {

TEST(AutoSchedule, DenseTradeOff) {
  const PolymatrixGame game = gen_dense(128, 0.25, 4, false, 3);
  const RunConfig c = auto_schedule(game, GraphKind::kDense, 4);
  EXPECT_EQ(c.rounds, 1U);
  EXPECT_NEAR(c.sigma * std::sqrt(static_cast<double>(c.rounds)), 1.0, 1e-15);
  EXPECT_NEAR(c.eta, 1.0 / std::cbrt(clubsuit(game, 4)), 1e-15);
}

TEST(AutoSchedule, SparseUsesWorstCaseSpadesuit) {
  const PolymatrixGame game = gen_sparse(512, 2, 4, false, 3);
  const RunConfig c = auto_schedule(game, GraphKind::kSparse, 4);
  EXPECT_EQ(c.rounds, sparse_rounds(512, game.max_degree()));
  const double spade = spadesuit_worst_case(game, c.rounds, 4);
  EXPECT_NEAR(c.eta, 1.0 / (c.rounds * std::cbrt(spade)), 1e-15);
}

TEST(ApplyOverrides, ReplacesOnlyGivenFields) {
  RunConfig base;
  base.eta = 0.3;
  base.sigma = 0.4;
  base.rounds = 5;
  const RunConfig c = apply_overrides(base, ScheduleOverrides{std::nullopt, 0.9, 12, 0.5});
  EXPECT_EQ(c.eta, 0.3);
  EXPECT_EQ(c.sigma, 0.9);
  EXPECT_EQ(c.rounds, 12U);
  EXPECT_EQ(c.tau_constant, 0.5);
}

TEST(ResampleEdge, ChangesExactlyOneEdge) {
  for (bool zero_sum : {false, true}) {
    const PolymatrixGame game = gen_dense(20, 0.3, 3, zero_sum, 4);
    const Edge e = pick_edge(game, 9);
    EXPECT_TRUE(game.has_edge(e.first, e.second));
    const PolymatrixGame adj = resample_edge(game, e, 9);
    EXPECT_NO_THROW(validate_game(adj));
    const auto changed = changed_edge(game, adj);
    ASSERT_TRUE(changed.has_value());
    EXPECT_EQ(changed->first, e.first);
    EXPECT_EQ(changed->second, e.second);
    if (zero_sum) {
      EXPECT_EQ(adj.utility(e.second, e.first), adj.utility(e.first, e.second).negated_transpose());
    }
    EXPECT_EQ(adj.utility(e.first, e.second), resample_edge(game, e, 9).utility(e.first, e.second));
  }
  EXPECT_THROW(resample_edge(testing::zero_chain(4), Edge::of(0, 2), 1), Error);
}

TEST(Audit, IdenticalResampleGivesZeroBudgets) {
  const PolymatrixGame game = gen_dense(40, 0.3, 3, false, 1);
  RunConfig c;
  c.sigma = 0.5;
  c.rounds = 4;
  AuditOptions o;
  o.identical_resample = true;
  const PrivacyReport r = audit(game, c, o);
  for (double x : r.empirical_budget_per_player) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(r.empirical_budget_avg, 0.0);
}

TEST(Audit, ZeroSigmaRejected) {
  const PolymatrixGame game = gen_dense(10, 0.5, 2, false, 1);
  RunConfig c;
  try {
    audit(game, c, AuditOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroSigma);
  }
}

TEST(Audit, EmpiricalBelowTheoryOnManySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PolymatrixGame game =
        seed % 2 ? gen_sparse(200, 2, 3, false, seed) : gen_dense(80, 0.25, 3, false, seed);
    RunConfig c = auto_schedule(game, seed % 2 ? GraphKind::kSparse : GraphKind::kDense, 3);
    c.master_seed = seed;
    AuditOptions o;
    o.alpha = 2.0;
    o.resample_seed = seed;
    const PrivacyReport r = audit(game, c, o);
    EXPECT_LE(r.empirical_budget_avg, r.theoretical_budget + 1e-9) << "seed " << seed;
    EXPECT_DOUBLE_EQ(r.spadesuit, spadesuit_worst_case(game, c.rounds, 3));
  }
}

TEST(Audit, SparseChainMostPlayersOutOfReach) {
  SplitMix64 rng(3);
  PolymatrixGame chain(std::vector<std::size_t>(101, 2), false);
  for (std::size_t k = 0; k < 100; ++k) {
    Matrix u(2, 2), v(2, 2);
    for (double& x : u.values) x = uniform(rng, -1, 1);
    for (double& x : v.values) x = uniform(rng, -1, 1);
    chain.add_edge(k, k + 1, u, v);
  }
  const auto dist = bfs_distances(chain, Edge::of(50, 51));
  std::vector<std::size_t> sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  RunConfig c;
  c.eta = 0.5;
  c.sigma = 0.3;
  c.rounds = sorted[sorted.size() / 2] - 1;
  AuditOptions o;
  o.edge = Edge::of(50, 51);
  const PrivacyReport r = audit(chain, c, o);
  const auto zeros = std::count(r.empirical_budget_per_player.begin(), r.empirical_budget_per_player.end(), 0.0);
  EXPECT_GT(static_cast<std::size_t>(zeros), chain.players() / 2);
  EXPECT_DOUBLE_EQ(r.spadesuit, spadesuit(chain, c.rounds, Edge::of(50, 51), 2));
}

TEST(Audit, ReportJson) {
  PrivacyReport r;
  r.alpha = 1.0;
  r.theoretical_budget = 0.5;
  r.empirical_budget_per_player = {0.1, 0.2};
  r.empirical_budget_avg = 0.15;
  r.edge = Edge::of(0, 1);
  auto j = report_to_json(r);
  EXPECT_TRUE(j.at("dp_epsilon").is_null());
  r.alpha = 2.0;
  j = report_to_json(r, std::exp(-1.0));
  EXPECT_DOUBLE_EQ(j.at("dp_epsilon").get<double>(), 1.5);
  EXPECT_EQ(j.at("edge"), nlohmann::json({0, 1}));
  std::ostringstream csv;
  write_budget_csv(r, csv);
  EXPECT_EQ(csv.str(), "player,empirical_budget\n0,0.1\n1,0.2\n");
}

TEST(RunMetrics, ZeroGameHasZeroExploitability) {
  const PolymatrixGame game = testing::zero_chain(6);
  RunConfig c;
  c.rounds = 45;
  c.tau_constant = 0.0;
  const Trace trace = run(game, c);
  const RunMetrics m = compute_run_metrics(game, trace);
  EXPECT_EQ(checkpoint_stride(45), 2U);
  EXPECT_EQ(m.checkpoints.front().first, 0U);
  EXPECT_EQ(m.checkpoints.back().first, 45U);
  EXPECT_EQ(m.checkpoints.size(), 24U);
  for (const auto& [t, v] : m.checkpoints) EXPECT_EQ(v, 0.0);
  for (double r : m.final_regret) EXPECT_EQ(r, 0.0);
}

TEST(RunMetrics, AutoScheduleRecordsUnitNoiseScale) {
  const PolymatrixGame game = gen_dense(64, 0.25, 4, false, 2);
  RunConfig c = auto_schedule(game, GraphKind::kDense, 4);
  c.master_seed = 5;
  const Trace trace = run(game, c);
  const RunMetrics m = compute_run_metrics(game, trace);
  EXPECT_NEAR(m.sigma_sqrt_t, 1.0, 1e-15);
  EXPECT_EQ(metrics_to_json(m, trace).dump(), metrics_to_json(compute_run_metrics(game, run(game, c)), trace).dump());
}

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.kind = GraphKind::kDense;
  cfg.ns = {16, 32};
  cfg.seeds = {3, 1, 2};
  cfg.actions = 2;
  return cfg;
}

TEST(Sweep, RowOrderAndDeterminism) {
  const SweepConfig cfg = small_sweep();
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 6U);
  const std::vector<std::pair<std::size_t, std::uint64_t>> want{{16, 3}, {16, 1}, {16, 2},
                                                               {32, 3}, {32, 1}, {32, 2}};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].n, want[k].first);
    EXPECT_EQ(rows[k].seed, want[k].second);
    EXPECT_EQ(rows[k].status, "ok");
    EXPECT_GE(rows[k].avg_exploitability, 0.0);
    EXPECT_GE(rows[k].eps_theory, 0.0);
    EXPECT_GE(rows[k].eps_empirical, 0.0);
    EXPECT_LE(rows[k].eps_empirical, rows[k].eps_theory + 1e-9);
  }
  SweepConfig parallel = cfg;
  parallel.workers = 4;
  const auto again = run_sweep(parallel);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].avg_exploitability, again[k].avg_exploitability);
    EXPECT_EQ(rows[k].eps_empirical, again[k].eps_empirical);
    EXPECT_EQ(rows[k].eps_theory, again[k].eps_theory);
  }
}

TEST(Sweep, FailedCellsAreMarked) {
  SweepConfig cfg = small_sweep();
  cfg.ns = {2, 16};
  const auto rows = run_sweep(cfg);
  EXPECT_EQ(rows[0].status, "error:DegenerateSchedule");
  EXPECT_EQ(rows[3].status, "ok");
}

TEST(Sweep, ConfigValidation) {
  SweepConfig cfg = small_sweep();
  cfg.ns = {32, 16};
  EXPECT_THROW(run_sweep(cfg), Error);
  cfg.ns = {16, 16};
  EXPECT_THROW(run_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.seeds.clear();
  EXPECT_THROW(run_sweep(cfg), Error);
  cfg = small_sweep();
  cfg.alpha = 0.5;
  EXPECT_THROW(run_sweep(cfg), Error);
}

TEST(SweepCsv, ExactHeaderAndRoundTrip) {
  const auto rows = run_sweep(small_sweep());
  std::stringstream ss;
  write_sweep_csv(rows, ss);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header,
            "n,seed,t_rounds,eta,sigma,avg_exploitability,eps_theory,eps_empirical,clubsuit,spadesuit,"
            "wall_ms,status");
  ss.seekg(0);
  const auto back = read_sweep_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].n, rows[k].n);
    EXPECT_EQ(back[k].seed, rows[k].seed);
    EXPECT_EQ(back[k].rounds, rows[k].rounds);
    EXPECT_EQ(back[k].eta, rows[k].eta);
    EXPECT_EQ(back[k].avg_exploitability, rows[k].avg_exploitability);
    EXPECT_EQ(back[k].eps_theory, rows[k].eps_theory);
    EXPECT_EQ(back[k].eps_empirical, rows[k].eps_empirical);
    EXPECT_EQ(back[k].status, rows[k].status);
  }
  std::stringstream bad("n,seed\n1,2\n");
  EXPECT_THROW(read_sweep_csv(bad), Error);
}

TEST(SweepCsv, ShippedSamplesMatchSchema) {
  for (const char* name : {"sample_dense_sweep.csv", "sample_sparse_sweep.csv"}) {
    std::ifstream in(std::string(DPEQ_SAMPLE_DIR) + "/" + name);
    ASSERT_TRUE(in) << name;
    const auto rows = read_sweep_csv(in);
    ASSERT_FALSE(rows.empty());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      EXPECT_EQ(rows[k].status, "ok");
      EXPECT_GE(rows[k].avg_exploitability, 0.0);
      EXPECT_GE(rows[k].eps_theory, 0.0);
      EXPECT_GE(rows[k].eps_empirical, 0.0);
      if (k > 0) {
        EXPECT_TRUE(rows[k - 1].n < rows[k].n || (rows[k - 1].n == rows[k].n && rows[k - 1].seed < rows[k].seed));
      }
    }
  }
}

TEST(Checks, ReducedSuiteHasNoBlockingFailures) {
  CheckOptions opt;
  opt.reduced = true;
  const auto results = run_checks(opt);
  ASSERT_EQ(results.size(), 11U);
  for (const auto& r : results) {
    EXPECT_TRUE(r.passed || is_documented_failure(r.id)) << r.id << ": " << r.detail;
  }
  EXPECT_EQ(blocking_failures(results), 0U);
}

TEST(Checks, CorruptedFixtureIsCaught) {
  CheckOptions opt;
  opt.reduced = true;
  opt.corrupt_fixture = true;
  EXPECT_FALSE(checks::fixtures(opt).passed);
  opt.corrupt_fixture = false;
  EXPECT_TRUE(checks::fixtures(opt).passed);
}

}  // namespace
}  // namespace dpeq
