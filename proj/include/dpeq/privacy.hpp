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

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpeq/dynamics.hpp"
#include "dpeq/error.hpp"
#include "dpeq/game.hpp"
#include "dpeq/graph_gen.hpp"

namespace dpeq {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Dense-regime per-round budget factor:
/// 16 A^3 (ln N)^2 / Nbar^{4/9} + 4A / N.
inline double clubsuit(std::size_t n, double harmonic_degree, std::size_t actions) {
  if (n < 2) fail(ErrorCode::kTooFewPlayers, "clubsuit needs N >= 2");
  const double a = static_cast<double>(actions);
  const double ln_n = std::log(static_cast<double>(n));
  return 16.0 * a * a * a * ln_n * ln_n / std::pow(harmonic_degree, 4.0 / 9.0) +
         4.0 * a / static_cast<double>(n);
}

inline double clubsuit(const PolymatrixGame& game, std::size_t actions) {
  return clubsuit(game.players(), harmonic_mean_degree(game), actions);
}

namespace detail {

// Number of players whose distance to {v1, v2} is below `rounds`. The
// search stops at depth rounds - 1, so short horizons stay cheap.
inline std::size_t players_within(const PolymatrixGame& game, Edge edge, std::size_t rounds) {
  if (rounds == 0) return 0;
  std::vector<std::size_t> dist(game.players(), kUnreachable);
  std::deque<Player> queue;
  std::size_t count = 0;
  for (Player s : {edge.first, edge.second}) {
    if (dist[s] == 0) continue;
    dist[s] = 0;
    queue.push_back(s);
    ++count;
  }
  while (!queue.empty()) {
    const Player u = queue.front();
    queue.pop_front();
    if (dist[u] + 1 >= rounds) continue;
    for (const auto& nb : game.neighbors(u)) {
      if (dist[nb.player] != kUnreachable) continue;
      dist[nb.player] = dist[u] + 1;
      queue.push_back(nb.player);
      ++count;
    }
  }
  return count;
}

}  // namespace detail

/// Sparse-regime factor for the changed edge (v1, v2):
/// (2A / N) * #{i : T > min(dist(i, v1), dist(i, v2))}.
inline double spadesuit(const PolymatrixGame& game, std::size_t rounds, Edge edge,
                        std::size_t actions) {
  if (!game.has_edge(edge.first, edge.second)) {
    fail(ErrorCode::kEdgeNotInGame,
         "edge " + std::to_string(edge.first) + "," + std::to_string(edge.second));
  }
  if (rounds < 1) fail(ErrorCode::kInvalidArgument, "spadesuit needs T >= 1");
  const double n = static_cast<double>(game.players());
  return 2.0 * static_cast<double>(actions) / n *
         static_cast<double>(detail::players_within(game, Edge::of(edge.first, edge.second), rounds));
}

/// Largest spadesuit over all edges; the edge-agnostic report value.
inline double spadesuit_worst_case(const PolymatrixGame& game, std::size_t rounds,
                                   std::size_t actions) {
  if (rounds < 1) fail(ErrorCode::kInvalidArgument, "spadesuit needs T >= 1");
  if (game.edges().empty()) return 0.0;
  const double n = static_cast<double>(game.players());
  const double scale = 2.0 * static_cast<double>(actions) / n;
  if (rounds == 1) return scale * 2.0;  // only the endpoints themselves count
  std::size_t worst = 0;
  for (const Edge& e : game.edges()) {
    worst = std::max(worst, detail::players_within(game, e, rounds));
    if (worst == game.players()) break;
  }
  return scale * static_cast<double>(worst);
}

/// alpha * eta^2 / sigma^2 * min(clubsuit, spadesuit) * T. sigma = 0 gives
/// +infinity: without noise there is no privacy.
inline double theoretical_budget(double alpha, double eta, double sigma, std::size_t rounds,
                                 double clubsuit_value, double spadesuit_value) {
  if (!(alpha >= 1.0)) fail(ErrorCode::kInvalidAlpha, "alpha must be >= 1");
  if (sigma == 0.0) return kInfinity;
  if (!(sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be nonnegative");
  return alpha * eta * eta / (sigma * sigma) * std::min(clubsuit_value, spadesuit_value) *
         static_cast<double>(rounds);
}

/// Same bound evaluated on a game; spadesuit uses `edge`, or the worst edge
/// when none is given.
inline double theoretical_budget(double alpha, double eta, double sigma, std::size_t rounds,
                                 const PolymatrixGame& game, std::size_t actions,
                                 std::optional<Edge> edge = std::nullopt) {
  const double club = clubsuit(game, actions);
  const double spade =
      edge ? spadesuit(game, rounds, *edge, actions) : spadesuit_worst_case(game, rounds, actions);
  return theoretical_budget(alpha, eta, sigma, rounds, club, spade);
}

/// Order-alpha Renyi divergence between N(m1, s^2 I) and N(m2, s^2 I):
/// alpha * ||m1 - m2||^2 / (2 s^2).
inline double gaussian_renyi(std::span<const double> m1, std::span<const double> m2, double sigma,
                             double alpha) {
  if (m1.size() != m2.size()) fail(ErrorCode::kDimMismatch, "means have different sizes");
  if (sigma == 0.0) fail(ErrorCode::kZeroSigma, "divergence undefined without noise");
  if (!(sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be positive");
  if (!(alpha > 0.0)) fail(ErrorCode::kInvalidAlpha, "alpha must be positive");
  double sq = 0.0;
  for (std::size_t k = 0; k < m1.size(); ++k) sq += (m1[k] - m2[k]) * (m1[k] - m2[k]);
  return alpha * sq / (2.0 * sigma * sigma);
}

struct EmpiricalBudget {
  Vector per_player;
  double average = 0.0;
};

/// Per-player sum over t = 1..T of the Gaussian divergence between the two
/// coupled runs' strategies at round t. The traces must share their noise
/// (see run_coupled); the mean differences are then the only divergence.
inline EmpiricalBudget empirical_budget(const Trace& a, const Trace& b, double sigma, double alpha) {
  if (a.rounds() != b.rounds() || a.rounds() == 0) {
    fail(ErrorCode::kTraceMismatch, "traces have different or zero lengths");
  }
  if (a.clean.front().size() != b.clean.front().size()) {
    fail(ErrorCode::kTraceMismatch, "traces have different player counts");
  }
  if (sigma == 0.0) fail(ErrorCode::kZeroSigma, "auditing requires sigma > 0");
  const std::size_t n = a.clean.front().size();
  EmpiricalBudget out;
  out.per_player.assign(n, 0.0);
  for (Player i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t t = 1; t <= a.rounds(); ++t) {
      if (a.clean[t][i].size() != b.clean[t][i].size()) {
        fail(ErrorCode::kTraceMismatch, "strategy sizes differ");
      }
      sum += gaussian_renyi(a.clean[t][i], b.clean[t][i], sigma, alpha);
    }
    out.per_player[i] = sum;
  }
  double total = 0.0;
  for (double x : out.per_player) total += x;
  out.average = total / static_cast<double>(n);
  return out;
}

/// (alpha, eps)-RDP implies (eps + ln(1/delta) / (alpha - 1), delta)-DP; at
/// alpha = +infinity the guarantee is (eps, 0)-DP.
inline double rdp_to_dp(double alpha, double eps, double delta) {
  if (std::isinf(alpha) && alpha > 0.0) return eps;
  if (!(alpha > 1.0)) fail(ErrorCode::kInvalidAlpha, "alpha must exceed 1");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::kInvalidDelta, "delta must be in (0, 1)");
  return eps + std::log(1.0 / delta) / (alpha - 1.0);
}

struct PrivacyReport {
  double alpha = 1.0;
  double clubsuit = 0.0;
  double spadesuit = 0.0;
  double theoretical_budget = 0.0;
  Vector empirical_budget_per_player;
  double empirical_budget_avg = 0.0;
  std::optional<Edge> edge;  // audited edge, if any

  /// (eps, delta)-DP epsilon implied by the theoretical budget.
  double dp_epsilon(double delta) const { return rdp_to_dp(alpha, theoretical_budget, delta); }
};

}  // namespace dpeq
