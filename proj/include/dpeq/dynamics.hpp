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


#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpeq/error.hpp"
#include "dpeq/game.hpp"
#include "dpeq/parallel.hpp"
#include "dpeq/rng.hpp"
#include "dpeq/simplex.hpp"

namespace dpeq {

/// Parameters of one run of the noisy regularized dynamics.
struct RunConfig {
  double eta = 0.1;
  double sigma = 0.0;        // per-coordinate noise standard deviation
  std::size_t rounds = 1;    // T, number of update rounds
  // Constant c in tau_i = c / |N(i)|; defaults to Nbar^{5/9} / ln N.
  std::optional<double> tau_constant;
  std::uint64_t master_seed = 0;
  bool record_noise = false;  // keep noises and observations in the trace
  std::size_t workers = 0;    // 0: DPEQ_THREADS or hardware concurrency

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void validate_config(const RunConfig& config) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta)) {
    fail(ErrorCode::kNonPositiveEta, "eta must be positive and finite");
  }
  if (!(config.sigma >= 0.0) || !std::isfinite(config.sigma)) {
    fail(ErrorCode::kInvalidArgument, "sigma must be nonnegative and finite");
  }
  if (config.rounds < 1) fail(ErrorCode::kInvalidArgument, "need at least one round");
  if (config.tau_constant && !(*config.tau_constant >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "tau constant must be nonnegative");
  }
}

/// Nbar = N / sum_i (1 / |N(i)|).
inline double harmonic_mean_degree(const PolymatrixGame& game) {
  double inverse_sum = 0.0;
  for (Player i = 0; i < game.players(); ++i) {
    if (game.degree(i) == 0) fail(ErrorCode::kIsolatedPlayer, "isolated player " + std::to_string(i));
    inverse_sum += 1.0 / static_cast<double>(game.degree(i));
  }
  return static_cast<double>(game.players()) / inverse_sum;
}

inline double default_tau_constant(const PolymatrixGame& game) {
  if (game.players() < 2) fail(ErrorCode::kTooFewPlayers, "tau schedule needs N >= 2");
  return std::pow(harmonic_mean_degree(game), 5.0 / 9.0) /
         std::log(static_cast<double>(game.players()));
}

struct TauSchedule {
  double constant = 0.0;
  Vector tau;  // per player
};

/// tau_i = c / |N(i)|: players with few neighbours are regularized more.
inline TauSchedule tau_schedule(const PolymatrixGame& game,
                                std::optional<double> constant = std::nullopt) {
  if (game.players() < 2) fail(ErrorCode::kTooFewPlayers, "tau schedule needs N >= 2");
  TauSchedule s;
  s.constant = constant ? *constant : default_tau_constant(game);
  s.tau.resize(game.players());
  for (Player i = 0; i < game.players(); ++i) {
    if (game.degree(i) == 0) fail(ErrorCode::kIsolatedPlayer, "isolated player " + std::to_string(i));
    s.tau[i] = s.constant / static_cast<double>(game.degree(i));
  }
  return s;
}

/// Record of one run. clean[t] is the profile pi^(t) for t = 0..T (clean[0]
/// is the uniform start); noises[t] and observations[t] are the round-t draw
/// and broadcast pi^(t) + n^(t) for t = 0..T-1 and are only filled when the
/// config asks for them.
struct Trace {
  RunConfig config;
  TauSchedule tau;
  std::vector<StrategyProfile> clean;
  std::vector<StrategyProfile> noises;
  std::vector<StrategyProfile> observations;

  std::size_t rounds() const { return clean.empty() ? 0 : clean.size() - 1; }

  /// The post-update iterates pi^(1)..pi^(T) that regret and privacy
  /// accounting range over.
  std::span<const StrategyProfile> iterates() const {
    return std::span<const StrategyProfile>(clean).subspan(clean.empty() ? 0 : 1);
  }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Optional gradient substitution: called with (round, player, gradient)
/// after the gradient is formed and before the proximal step uses it.
using GradientHook = std::function<void(std::size_t, Player, std::span<double>)>;

/// Noise vector n_i^(t). Each (player, round) cell has its own stream derived
/// from the master seed, so runs are reproducible for any worker count and
/// two runs with the same seed share their noise exactly.
inline void sample_noise(std::uint64_t master_seed, Player player, std::size_t round, double sigma,
                         std::span<double> out) {
  if (sigma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  SplitMix64 stream(stream_seed(master_seed, player, round));
  StandardNormal normal;
  for (double& x : out) x = sigma * normal(stream);
}

/// Runs the dynamics for config.rounds synchronous rounds. In round t each
/// player broadcasts pi_i + n_i, every player projects what it receives back
/// onto the simplex, forms its gradient from the projected neighbour
/// strategies, and takes a proximal step from its own projected broadcast.
inline Trace run(const PolymatrixGame& game, const RunConfig& config, const GradientHook& hook = {}) {
  validate_game(game);
  validate_config(config);
  const std::size_t n = game.players();
  if (n < 2) fail(ErrorCode::kTooFewPlayers, "dynamics need N >= 2");

  Trace trace;
  trace.config = config;
  trace.tau = tau_schedule(game, config.tau_constant);
  trace.clean.reserve(config.rounds + 1);
  trace.clean.push_back(uniform_profile(game));
  if (config.record_noise) {
    trace.noises.reserve(config.rounds);
    trace.observations.reserve(config.rounds);
  }

  const std::size_t workers = resolve_workers(config.workers);
  StrategyProfile noise(n), observed(n), projected(n), next(n);
  for (Player i = 0; i < n; ++i) {
    noise[i].assign(game.actions(i), 0.0);
    observed[i].assign(game.actions(i), 0.0);
  }

  for (std::size_t t = 0; t < config.rounds; ++t) {
    const StrategyProfile& current = trace.clean.back();
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
      for (Player i = begin; i < end; ++i) {
        sample_noise(config.master_seed, i, t, config.sigma, noise[i]);
        for (std::size_t a = 0; a < noise[i].size(); ++a) observed[i][a] = current[i][a] + noise[i][a];
        projected[i] = project_simplex(observed[i]);
      }
    });
    // Barrier: every broadcast of round t is complete before any update.
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
      Vector g;
      for (Player i = begin; i < end; ++i) {
        g.assign(game.actions(i), 0.0);
        accumulate_gradient(
            game, i, [&](std::size_t, Player j) { return std::span<const double>(projected[j]); }, g);
        if (hook) hook(t, i, g);
        next[i] = proximal_step(projected[i], g, config.eta, trace.tau.tau[i]);
      }
    });
    if (config.record_noise) {
      trace.noises.push_back(noise);
      trace.observations.push_back(observed);
    }
    trace.clean.push_back(next);
  }
  return trace;
}

/// The single undirected edge on which two structurally identical games
/// differ, or nullopt when they are identical. Matrices are compared exactly.
inline std::optional<Edge> changed_edge(const PolymatrixGame& a, const PolymatrixGame& b) {
  if (a.action_counts() != b.action_counts() || a.edges().size() != b.edges().size()) {
    fail(ErrorCode::kNotAdjacent, "games have different structure");
  }
  std::optional<Edge> changed;
  for (const Edge& e : a.edges()) {
    if (!b.has_edge(e.first, e.second)) fail(ErrorCode::kNotAdjacent, "edge sets differ");
    const bool differs = a.utility(e.first, e.second) != b.utility(e.first, e.second) ||
                         a.utility(e.second, e.first) != b.utility(e.second, e.first);
    if (!differs) continue;
    if (changed) fail(ErrorCode::kNotAdjacent, "games differ on more than one edge");
    changed = e;
  }
  return changed;
}

struct CoupledTraces {
  Trace a;
  Trace b;
  std::optional<Edge> changed;
};

/// Runs two adjacent games under one configuration. The noise streams are
/// keyed by (seed, player, round) only, so both runs see the same draws.
inline CoupledTraces run_coupled(const PolymatrixGame& game_a, const PolymatrixGame& game_b,
                                 const RunConfig& config, const GradientHook& hook_a = {},
                                 const GradientHook& hook_b = {}) {
  validate_game(game_a);
  validate_game(game_b);
  CoupledTraces out;
  out.changed = changed_edge(game_a, game_b);
  // The tau schedule depends only on the graph, which adjacency preserves.
  out.a = run(game_a, config, hook_a);
  out.b = run(game_b, config, hook_b);
  return out;
}

namespace detail {
inline double round_half_up(double x) { return std::floor(x + 0.5); }
}  // namespace detail

/// Dense-regime schedule: T = N^{8p/9} / (ln N)^4 (rounded, at least 1),
/// eta = 1 / (T * clubsuit^{1/3}), sigma = 1 / sqrt(T).
inline RunConfig hyperparams_dense(std::size_t n, double p, double clubsuit) {
  if (n < 3) fail(ErrorCode::kDegenerateSchedule, "dense schedule needs N >= 3");
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorCode::kDegenerateSchedule, "p must be in (0, 1]");
  if (!(clubsuit > 0.0) || !std::isfinite(clubsuit)) {
    fail(ErrorCode::kDegenerateSchedule, "clubsuit must be positive and finite");
  }
  const double nd = static_cast<double>(n);
  const double raw = std::pow(nd, 8.0 * p / 9.0) / std::pow(std::log(nd), 4.0);
  if (!std::isfinite(raw)) fail(ErrorCode::kDegenerateSchedule, "round count overflowed");
  RunConfig config;
  config.rounds = static_cast<std::size_t>(std::max(1.0, detail::round_half_up(raw)));
  const double t = static_cast<double>(config.rounds);
  config.eta = 1.0 / (t * std::cbrt(clubsuit));
  config.sigma = 1.0 / std::sqrt(t);
  return config;
}

inline constexpr std::size_t kDefaultSparseRounds = 100;

/// Sparse-regime round count: (1 - log_N ln N) * log_{Nmax} N, rounded and at
/// least 1. With Nmax = 1 the budget does not depend on T and the default is
/// used instead.
inline std::size_t sparse_rounds(std::size_t n, std::size_t max_degree) {
  if (n < 3) fail(ErrorCode::kDegenerateSchedule, "sparse schedule needs N >= 3");
  if (max_degree < 1) fail(ErrorCode::kDegenerateSchedule, "max degree must be >= 1");
  if (max_degree == 1) return kDefaultSparseRounds;
  const double ln_n = std::log(static_cast<double>(n));
  const double raw = (1.0 - std::log(ln_n) / ln_n) * ln_n / std::log(static_cast<double>(max_degree));
  return static_cast<std::size_t>(std::max(1.0, detail::round_half_up(raw)));
}

/// Sparse-regime schedule. `spadesuit` must be evaluated at
/// sparse_rounds(n, max_degree).
inline RunConfig hyperparams_sparse(std::size_t n, std::size_t max_degree, double spadesuit) {
  if (!(spadesuit > 0.0) || !std::isfinite(spadesuit)) {
    fail(ErrorCode::kDegenerateSchedule, "spadesuit must be positive and finite");
  }
  RunConfig config;
  config.rounds = sparse_rounds(n, max_degree);
  const double t = static_cast<double>(config.rounds);
  config.eta = 1.0 / (t * std::cbrt(spadesuit));
  config.sigma = 1.0 / std::sqrt(t);
  return config;
}

/// Right-hand side of the general-sum regret guarantee for the run
/// parameters: 1/(eta T) + A sigma^2/(2 eta) + (2 eta^2/sigma + 7 sigma/2) A^{3/2}
/// + 1/(2 Nbar^{4/9} ln N) + 2 eta sqrt(A) / (sigma Nbar^{4/9} ln N).
inline double general_sum_regret_bound(double eta, double sigma, std::size_t rounds,
                                       std::size_t actions, double harmonic_degree, std::size_t n) {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  const double a = static_cast<double>(actions);
  const double t = static_cast<double>(rounds);
  const double degree_term = std::pow(harmonic_degree, 4.0 / 9.0) * std::log(static_cast<double>(n));
  return 1.0 / (eta * t) + a * sigma * sigma / (2.0 * eta) +
         (2.0 * eta * eta / sigma + 3.5 * sigma) * std::pow(a, 1.5) + 1.0 / (2.0 * degree_term) +
         2.0 * eta * std::sqrt(a) / (sigma * degree_term);
}

}  // namespace dpeq
