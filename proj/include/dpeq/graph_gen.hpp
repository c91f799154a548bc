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
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dpeq/error.hpp"
#include "dpeq/game.hpp"
#include "dpeq/rng.hpp"

namespace dpeq {

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

namespace detail {

inline constexpr std::size_t kIsolatedRetries = 64;

inline Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& x : m.values) x = uniform(rng, -1.0, 1.0);
  return m;
}

// Fills utilities for a fixed edge list, in edge order.
inline PolymatrixGame assemble(std::size_t n, std::size_t actions, bool zero_sum,
                               const std::vector<Edge>& edges, SplitMix64& rng) {
  PolymatrixGame game(std::vector<std::size_t>(n, actions), zero_sum);
  for (const Edge& e : edges) {
    Matrix forward = random_matrix(rng, actions, actions);
    Matrix backward = zero_sum ? forward.negated_transpose() : random_matrix(rng, actions, actions);
    game.add_edge(e.first, e.second, std::move(forward), std::move(backward));
  }
  return game;
}

inline std::vector<Edge> edges_from_adjacency(const std::vector<std::vector<bool>>& adj) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (std::size_t j = i + 1; j < adj.size(); ++j)
      if (adj[i][j]) edges.push_back({i, j});
  return edges;
}

inline void attach_isolated(std::vector<std::vector<bool>>& adj, std::size_t i, SplitMix64& rng) {
  const std::size_t n = adj.size();
  std::size_t j = uniform_index(rng, n - 1);
  if (j >= i) ++j;
  adj[i][j] = adj[j][i] = true;
}

inline bool isolated(const std::vector<std::vector<bool>>& adj, std::size_t i) {
  for (bool b : adj[i])
    if (b) return false;
  return true;
}

}  // namespace detail

/// Dense random game: every node links to every other node independently
/// with probability p, then the two directed draws for a pair are merged.
/// Isolated nodes redraw their links, and after a bounded number of retries
/// are attached to a uniformly random partner. Utilities are iid U[-1, 1].
inline PolymatrixGame gen_dense(std::size_t n, double p, std::size_t actions, bool zero_sum,
                                std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::kTooFewPlayers, "dense generator needs n >= 2");
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorCode::kInvalidArgument, "p must be in (0, 1]");
  if (actions == 0) fail(ErrorCode::kInvalidArgument, "action count must be positive");

  SplitMix64 rng(stream_seed(seed, 0xD15E, 0));
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  auto draw_row = [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && uniform01(rng) < p) adj[i][j] = adj[j][i] = true;
    }
  };
  for (std::size_t i = 0; i < n; ++i) draw_row(i);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t attempt = 0; attempt < detail::kIsolatedRetries && detail::isolated(adj, i);
         ++attempt) {
      draw_row(i);
    }
    if (detail::isolated(adj, i)) detail::attach_isolated(adj, i, rng);
  }
  return detail::assemble(n, actions, zero_sum, detail::edges_from_adjacency(adj), rng);
}

/// Sparse random game: a shuffled stream holding every node id c times is
/// cut into consecutive pairs, each pair proposing one edge. Self-loops and
/// duplicates are dropped; isolated nodes are attached to a random partner.
/// With c = 1 and n even this is a random perfect matching minus collisions.
inline PolymatrixGame gen_sparse(std::size_t n, std::size_t c, std::size_t actions, bool zero_sum,
                                 std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::kTooFewPlayers, "sparse generator needs n >= 2");
  if (c < 1) fail(ErrorCode::kInvalidArgument, "c must be >= 1");
  if (actions == 0) fail(ErrorCode::kInvalidArgument, "action count must be positive");

  SplitMix64 rng(stream_seed(seed, 0x5BA5E, 0));
  std::vector<std::size_t> stream;
  stream.reserve(n * c);
  for (std::size_t copy = 0; copy < c; ++copy)
    for (std::size_t i = 0; i < n; ++i) stream.push_back(i);
  // Fisher-Yates with the portable index sampler.
  for (std::size_t k = stream.size(); k > 1; --k) {
    std::swap(stream[k - 1], stream[uniform_index(rng, k)]);
  }
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t k = 0; k + 1 < stream.size(); k += 2) {
    const std::size_t a = stream[k];
    const std::size_t b = stream[k + 1];
    if (a != b) adj[a][b] = adj[b][a] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (detail::isolated(adj, i)) detail::attach_isolated(adj, i, rng);
  }
  return detail::assemble(n, actions, zero_sum, detail::edges_from_adjacency(adj), rng);
}

/// Multi-source BFS: min(dist(i, v1), dist(i, v2)) for every player, with
/// kUnreachable for players in other components.
inline std::vector<std::size_t> bfs_distances(const PolymatrixGame& game,
                                              std::initializer_list<Player> sources) {
  std::vector<std::size_t> dist(game.players(), kUnreachable);
  std::deque<Player> queue;
  for (Player s : sources) {
    if (s >= game.players()) fail(ErrorCode::kInvalidArgument, "BFS source out of range");
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Player u = queue.front();
    queue.pop_front();
    for (const auto& nb : game.neighbors(u)) {
      if (dist[nb.player] == kUnreachable) {
        dist[nb.player] = dist[u] + 1;
        queue.push_back(nb.player);
      }
    }
  }
  return dist;
}

inline std::vector<std::size_t> bfs_distances(const PolymatrixGame& game, Edge edge) {
  return bfs_distances(game, {edge.first, edge.second});
}

/// A game together with a pure equilibrium it is known to have.
struct Fixture {
  PolymatrixGame game;
  std::vector<std::size_t> equilibrium;  // action index per player

  StrategyProfile equilibrium_profile() const { return pure_profile(game, equilibrium); }
};

inline constexpr std::size_t kMaxChainFixturePlayers = 16;

/// Zero-sum chain 0 - 1 - ... - (n-1) with two actions per player. Edge
/// (k, k+1) carries [[.5, .5-e], [.5-3e, .5-2e]] with e = 0.1 * 10^-k and the
/// negated transpose in the other direction. Its equilibrium alternates
/// a1, a2, a1, ...
///
/// With `flipped`, the actions of both players on edge (0, 1) are relabelled
/// in U_{0,1}, which moves every player's equilibrium action to the other
/// one: a2, a1, a2, ...
inline Fixture fixture_chain_flip(std::size_t n, bool flipped) {
  if (n < 2) fail(ErrorCode::kTooFewPlayers, "chain fixture needs n >= 2");
  if (n > kMaxChainFixturePlayers) {
    fail(ErrorCode::kFixtureTooLarge, "chain fixture supports at most 16 players");
  }
  PolymatrixGame game(std::vector<std::size_t>(n, 2), /*zero_sum=*/true);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double e = 0.1 * std::pow(10.0, -static_cast<double>(k));
    Matrix u{{0.5, 0.5 - e}, {0.5 - 3 * e, 0.5 - 2 * e}};
    if (flipped && k == 0) u = Matrix{{0.5 - 2 * e, 0.5 - 3 * e}, {0.5 - e, 0.5}};
    Matrix back = u.negated_transpose();
    game.add_edge(k, k + 1, std::move(u), std::move(back));
  }
  Fixture f{std::move(game), std::vector<std::size_t>(n)};
  for (std::size_t k = 0; k < n; ++k) f.equilibrium[k] = (k % 2 == 0) == flipped ? 1 : 0;
  return f;
}

/// Zero-sum chain of 3 * triplets players, two actions each. Within triplet
/// (h, m, t) = (3k, 3k+1, 3k+2): U_{m,h} = [[1, 1], [0, 0]] makes m prefer
/// a1, and U_{t,m} = [[.2, -.7], [0, -.6]] makes t copy m while tilting m
/// against a2 by less than U_{m,h} favours a1. All other edges are zero.
/// Everybody playing a1 is an equilibrium.
inline Fixture fixture_triplet_chain(std::size_t triplets) {
  if (triplets < 1) fail(ErrorCode::kInvalidArgument, "need at least one triplet");
  const std::size_t n = 3 * triplets;
  PolymatrixGame game(std::vector<std::size_t>(n, 2), /*zero_sum=*/true);
  const Matrix head{{1.0, 1.0}, {0.0, 0.0}};
  const Matrix tail{{0.2, -0.7}, {0.0, -0.6}};
  for (std::size_t p = 0; p + 1 < n; ++p) {
    switch (p % 3) {
      case 0:  // (h, m): U_{m,h} = head
        game.add_edge(p, p + 1, head.negated_transpose(), head);
        break;
      case 1:  // (m, t): U_{t,m} = tail
        game.add_edge(p, p + 1, tail.negated_transpose(), tail);
        break;
      default:
        game.add_edge(p, p + 1, Matrix(2, 2), Matrix(2, 2));
        break;
    }
  }
  return Fixture{std::move(game), std::vector<std::size_t>(n, 0)};
}

/// The adjacent game in which U_{m,h} of triplet `which` becomes the
/// coordination matrix [[.5, 0], [0, .5]]. Its equilibrium moves m and t of
/// that triplet to a2 and leaves every other player at a1.
inline Fixture fixture_triplet_chain_variant(std::size_t triplets, std::size_t which) {
  if (which >= triplets) fail(ErrorCode::kInvalidArgument, "triplet index out of range");
  Fixture f = fixture_triplet_chain(triplets);
  const Matrix coordination{{0.5, 0.0}, {0.0, 0.5}};
  const Player h = 3 * which;
  f.game.set_utility(h + 1, h, coordination);
  f.game.set_utility(h, h + 1, coordination.negated_transpose());
  f.equilibrium[h + 1] = 1;
  f.equilibrium[h + 2] = 1;
  return f;
}

}  // namespace dpeq
