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

#include <cmath>
#include <vector>

#include "dpeq/dynamics.hpp"
#include "dpeq/error.hpp"
#include "dpeq/graph_gen.hpp"
#include "dpeq/privacy.hpp"
#include "test_util.hpp"

namespace dpeq {
namespace {

PolymatrixGame star(std::size_t leaves) {
  PolymatrixGame game(std::vector<std::size_t>(leaves + 1, 2), false);
  for (std::size_t k = 1; k <= leaves; ++k) game.add_edge(0, k, Matrix(2, 2), Matrix(2, 2));
  return game;
}

TEST(HarmonicMeanDegree, HandValues) {
  EXPECT_DOUBLE_EQ(harmonic_mean_degree(gen_dense(5, 1.0, 2, false, 0)), 4.0);
  EXPECT_NEAR(harmonic_mean_degree(testing::zero_chain(4)), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(harmonic_mean_degree(star(3)), 1.2, 1e-15);
}

TEST(TauSchedule, RegularGraphFormula) {
  const PolymatrixGame game = gen_dense(5, 1.0, 2, false, 0);
  const TauSchedule s = tau_schedule(game);
  const double want = std::pow(4.0, 5.0 / 9.0) / (4.0 * std::log(5.0));
  for (double t : s.tau) EXPECT_NEAR(t, want, 1e-15);
}

TEST(TauSchedule, TenPlayerRegularGolden) {
  // Ring with chords i +- 1, i +- 2: 4-regular on 10 players.
  PolymatrixGame game(std::vector<std::size_t>(10, 2), false);
  for (std::size_t i = 0; i < 10; ++i) {
    game.add_edge(i, (i + 1) % 10, Matrix(2, 2), Matrix(2, 2));
    game.add_edge(i, (i + 2) % 10, Matrix(2, 2), Matrix(2, 2));
  }
  for (double t : tau_schedule(game).tau) EXPECT_NEAR(t, 0.23453199236339775, 1e-14);
}

TEST(TauSchedule, MeanIdentityAndNeighbourBound) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const PolymatrixGame game = seed % 2 ? gen_sparse(80, 3, 2, false, seed) : gen_dense(60, 0.1, 2, false, seed);
    const TauSchedule s = tau_schedule(game);
    const double target = s.constant / harmonic_mean_degree(game);
    double mean = 0.0;
    double neighbour = 0.0;
    for (Player i = 0; i < game.players(); ++i) {
      mean += s.tau[i];
      double inner = 0.0;
      for (const auto& nb : game.neighbors(i)) inner += s.tau[nb.player];
      neighbour += inner / game.degree(i);
    }
    mean /= game.players();
    neighbour /= game.players();
    EXPECT_NEAR(mean, target, 1e-12);
    EXPECT_LE(neighbour, target + 1e-12);
  }
}

TEST(TauSchedule, PointwiseInDegree) {
  // Two disjoint copies of a graph keep Nbar, so with a fixed constant each
  // player's tau only depends on its own degree.
  const PolymatrixGame one = testing::zero_chain(4);
  PolymatrixGame two(std::vector<std::size_t>(8, 2), false);
  for (std::size_t k = 0; k < 3; ++k) {
    two.add_edge(k, k + 1, Matrix(2, 2), Matrix(2, 2));
    two.add_edge(k + 4, k + 5, Matrix(2, 2), Matrix(2, 2));
  }
  EXPECT_DOUBLE_EQ(harmonic_mean_degree(one), harmonic_mean_degree(two));
  const TauSchedule a = tau_schedule(one, 0.9);
  const TauSchedule b = tau_schedule(two, 0.9);
  for (Player i = 0; i < 4; ++i) {
    EXPECT_EQ(a.tau[i], b.tau[i]);
    EXPECT_EQ(a.tau[i], b.tau[i + 4]);
  }
}

TEST(TauSchedule, TooFewPlayers) {
  PolymatrixGame game({2}, false);
  try {
    tau_schedule(game);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPlayers);
  }
}

TEST(Noise, ZeroSigmaGivesExactZeros) {
  Vector out(5, 7.0);
  sample_noise(1, 2, 3, 0.0, out);
  for (double x : out) EXPECT_EQ(x, 0.0);
}

TEST(Noise, ReproducibleAndKeyedByCell) {
  Vector a(4), b(4), c(4), d(4);
  sample_noise(9, 1, 5, 0.5, a);
  sample_noise(9, 1, 5, 0.5, b);
  sample_noise(9, 2, 5, 0.5, c);
  sample_noise(9, 1, 6, 0.5, d);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, d);
}

TEST(Noise, MomentsMatchSigma) {
  double sum = 0.0, sq = 0.0;
  const int cells = 20000;
  Vector v(4);
  for (int k = 0; k < cells; ++k) {
    sample_noise(3, k % 100, k / 100, 0.7, v);
    for (double x : v) {
      sum += x;
      sq += x * x;
    }
  }
  const double n = 4.0 * cells;
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sq / n), 0.7, 0.01);
}

TEST(Run, ZeroGameStaysUniform) {
  const PolymatrixGame game = testing::zero_chain(5, 3);
  RunConfig c;
  c.rounds = 20;
  c.tau_constant = 0.0;
  const Trace trace = run(game, c);
  ASSERT_EQ(trace.clean.size(), 21U);
  for (const auto& profile : trace.clean) {
    for (const Vector& s : profile) {
      for (double x : s) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    }
  }
  EXPECT_EQ(trace.iterates().size(), 20U);
  EXPECT_EQ(trace.rounds(), 20U);
}

TEST(Run, NoiselessZeroSumPairRegretShrinks) {
  const PolymatrixGame game = testing::zero_sum_pair(Matrix{{0.8, -0.6}, {-0.4, 0.2}});
  auto regret_after = [&](std::size_t rounds) {
    RunConfig c;
    c.eta = 0.05;
    c.rounds = rounds;
    c.tau_constant = 0.0;
    const Trace trace = run(game, c);
    for (const auto& profile : trace.clean) {
      for (const Vector& s : profile) EXPECT_TRUE(is_on_simplex(s, 1e-12));
    }
    const Vector r = time_avg_regrets(game, trace.iterates());
    return std::max(r[0], r[1]);
  };
  const double short_run = regret_after(10);
  const double long_run = regret_after(1000);
  EXPECT_GT(short_run, 0.0);
  EXPECT_LT(long_run, short_run);
}

TEST(Run, BitwiseIdenticalAcrossWorkerCounts) {
  const PolymatrixGame game = gen_dense(40, 0.3, 3, false, 6);
  RunConfig c;
  c.eta = 0.3;
  c.sigma = 0.2;
  c.rounds = 15;
  c.master_seed = 77;
  c.record_noise = true;
  c.workers = 1;
  const Trace one = run(game, c);
  c.workers = 8;
  const Trace eight = run(game, c);
  EXPECT_EQ(one.clean, eight.clean);
  EXPECT_EQ(one.noises, eight.noises);
  EXPECT_EQ(one.observations, eight.observations);
}

TEST(Run, RecordsBroadcasts) {
  const PolymatrixGame game = gen_dense(6, 0.8, 2, false, 1);
  RunConfig c;
  c.sigma = 0.5;
  c.rounds = 3;
  c.record_noise = true;
  const Trace trace = run(game, c);
  ASSERT_EQ(trace.noises.size(), 3U);
  for (std::size_t t = 0; t < 3; ++t) {
    for (Player i = 0; i < 6; ++i) {
      for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_EQ(trace.observations[t][i][a], trace.clean[t][i][a] + trace.noises[t][i][a]);
      }
    }
  }
}

TEST(Run, HookReplacesGradient) {
  const PolymatrixGame game = testing::zero_chain(3);
  RunConfig c;
  c.eta = 0.1;
  c.rounds = 1;
  c.tau_constant = 0.0;
  const Trace trace = run(game, c, [](std::size_t, Player i, std::span<double> g) {
    if (i == 1) {
      g[0] = 1.0;
      g[1] = -1.0;
    }
  });
  EXPECT_NEAR(trace.clean[1][1][0], 0.4, 1e-15);
  EXPECT_NEAR(trace.clean[1][0][0], 0.5, 1e-15);
}

TEST(Run, RejectsBadConfig) {
  const PolymatrixGame game = testing::zero_chain(3);
  RunConfig c;
  c.eta = 0.0;
  EXPECT_THROW(run(game, c), Error);
  c.eta = 0.1;
  c.sigma = -1.0;
  EXPECT_THROW(run(game, c), Error);
  c.sigma = 0.0;
  c.rounds = 0;
  EXPECT_THROW(run(game, c), Error);
}

TEST(RunCoupled, IdenticalGamesGiveIdenticalTraces) {
  const PolymatrixGame game = gen_dense(20, 0.3, 3, false, 2);
  RunConfig c;
  c.sigma = 0.4;
  c.rounds = 10;
  c.master_seed = 3;
  const CoupledTraces ct = run_coupled(game, game, c);
  EXPECT_FALSE(ct.changed.has_value());
  EXPECT_EQ(ct.a.clean, ct.b.clean);
}

TEST(RunCoupled, DetectsChangedEdgeAndRejectsNonAdjacent) {
  PolymatrixGame a = gen_dense(10, 0.5, 2, false, 4);
  PolymatrixGame b = a;
  const Edge e = a.edges()[3];
  b.set_utility(e.first, e.second, Matrix(2, 2, 0.25));
  const auto changed = changed_edge(a, b);
  ASSERT_TRUE(changed.has_value());
  EXPECT_EQ(changed->first, e.first);
  EXPECT_EQ(changed->second, e.second);

  const Edge f = a.edges()[5];
  b.set_utility(f.first, f.second, Matrix(2, 2, 0.25));
  try {
    changed_edge(a, b);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kNotAdjacent);
  }
  EXPECT_THROW(changed_edge(a, gen_dense(11, 0.5, 2, false, 4)), Error);
}

TEST(RunCoupled, ChangeTravelsOneHopPerRound) {
  SplitMix64 rng(8);
  PolymatrixGame a(std::vector<std::size_t>(12, 2), false);
  for (std::size_t k = 0; k + 1 < 12; ++k) {
    Matrix u(2, 2), v(2, 2);
    for (double& x : u.values) x = uniform(rng, -1, 1);
    for (double& x : v.values) x = uniform(rng, -1, 1);
    a.add_edge(k, k + 1, u, v);
  }
  PolymatrixGame b = a;
  b.set_utility(0, 1, Matrix{{1, -1}, {-1, 1}});
  RunConfig c;
  c.eta = 0.5;
  c.sigma = 0.1;
  c.rounds = 15;
  const CoupledTraces ct = run_coupled(a, b, c);
  const auto dist = bfs_distances(a, Edge::of(0, 1));
  for (Player i = 0; i < 12; ++i) {
    for (std::size_t t = 0; t <= std::min<std::size_t>(15, dist[i]); ++t) {
      EXPECT_EQ(ct.a.clean[t][i], ct.b.clean[t][i]) << "player " << i << " t " << t;
    }
  }
  EXPECT_NE(ct.a.clean[1][0], ct.b.clean[1][0]);
}

TEST(HyperparamsDense, GoldenRoundCounts) {
  // 1024^{8/9} / (ln 1024)^4 = 0.2054 -> clamped to one round.
  const RunConfig small = hyperparams_dense(1024, 1.0, 8.0);
  EXPECT_EQ(small.rounds, 1U);
  EXPECT_DOUBLE_EQ(small.eta, 0.5);
  EXPECT_DOUBLE_EQ(small.sigma, 1.0);
  // 2^20: 6.0845 -> 6 rounds.
  const RunConfig big = hyperparams_dense(std::size_t{1} << 20, 1.0, 3.0);
  EXPECT_EQ(big.rounds, 6U);
  EXPECT_NEAR(big.eta, 0.11556021239177247, 1e-15);
  EXPECT_NEAR(big.sigma, 0.4082482904638631, 1e-15);
  EXPECT_NEAR(big.sigma * std::sqrt(6.0), 1.0, 1e-15);
}

TEST(HyperparamsDense, Degenerate) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code([] { hyperparams_dense(2, 1.0, 1.0); }), ErrorCode::kDegenerateSchedule);
  EXPECT_EQ(code([] { hyperparams_dense(100, 0.0, 1.0); }), ErrorCode::kDegenerateSchedule);
  EXPECT_EQ(code([] { hyperparams_dense(100, 1.0, 0.0); }), ErrorCode::kDegenerateSchedule);
  EXPECT_EQ(code([] { hyperparams_dense(100, 1.0, INFINITY); }), ErrorCode::kDegenerateSchedule);
}

TEST(HyperparamsSparse, GoldenRoundCounts) {
  // (1 - ln ln N / ln N) * log2 N at N = 2^14 is 10.72.
  EXPECT_EQ(sparse_rounds(std::size_t{1} << 14, 2), 11U);
  // N = 1024, Nmax = 4: 3.60.
  EXPECT_EQ(sparse_rounds(1024, 4), 4U);
  EXPECT_EQ(sparse_rounds(100, 1), kDefaultSparseRounds);
  const double spade = 2.0 * 4 / 100;
  const RunConfig c = hyperparams_sparse(100, 1, spade);
  EXPECT_EQ(c.rounds, 100U);
  EXPECT_NEAR(c.eta, 1.0 / (100.0 * std::cbrt(spade)), 1e-15);
  EXPECT_NEAR(c.sigma, 0.1, 1e-15);
  EXPECT_THROW(hyperparams_sparse(100, 3, 0.0), Error);
  EXPECT_THROW(sparse_rounds(2, 1), Error);
}

TEST(RegretBound, GoldenValue) {
  EXPECT_NEAR(general_sum_regret_bound(0.1, 0.5, 10, 3, 6.0, 50), 14.188621046948434, 1e-12);
  EXPECT_TRUE(std::isinf(general_sum_regret_bound(0.1, 0.0, 10, 3, 6.0, 50)));
}

}  // namespace
}  // namespace dpeq
