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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpeq/error.hpp"
#include "dpeq/simplex.hpp"

namespace dpeq {

using Player = std::size_t;

/// Dense row-major matrix. Rows index the owner's actions, columns the
/// neighbor's actions.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows = init.size();
    cols = rows == 0 ? 0 : init.begin()->size();
    for (const auto& row : init) {
      if (row.size() != cols) fail(ErrorCode::kShapeMismatch, "ragged matrix literal");
      values.insert(values.end(), row.begin(), row.end());
    }
  }

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  Matrix negated_transpose() const {
    Matrix t = transposed();
    for (double& x : t.values) x = -x;
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Undirected edge, stored with first < second.
struct Edge {
  Player first = 0;
  Player second = 0;

  static Edge of(Player a, Player b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using StrategyProfile = std::vector<Vector>;

/// A polymatrix game on an undirected interaction graph. Both directed
/// utility matrices U_{i,j} and U_{j,i} are stored for every edge; they are
/// independent unless the zero-sum flag is set.
///
/// Construction does not validate; call validate_game() before use.
class PolymatrixGame {
 public:
  struct Neighbor {
    Player player;
    std::size_t matrix;  // index of U_{owner, player}
  };

  PolymatrixGame() = default;
  explicit PolymatrixGame(std::vector<std::size_t> actions, bool zero_sum = false)
      : actions_(std::move(actions)),
        zero_sum_(zero_sum),
        neighbors_(actions_.size()) {}

  std::size_t players() const { return actions_.size(); }
  std::size_t actions(Player i) const { return actions_.at(i); }
  const std::vector<std::size_t>& action_counts() const { return actions_; }
  std::size_t max_actions() const {
    return actions_.empty() ? 0 : *std::max_element(actions_.begin(), actions_.end());
  }
  bool zero_sum() const { return zero_sum_; }
  void set_zero_sum(bool flag) { zero_sum_ = flag; }

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const Neighbor> neighbors(Player i) const { return neighbors_.at(i); }
  std::size_t degree(Player i) const { return neighbors_.at(i).size(); }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& n : neighbors_) d = std::max(d, n.size());
    return d;
  }

  bool has_edge(Player i, Player j) const {
    return index_.contains(key(i, j));
  }

  /// Adds the undirected edge (i, j) with empty utility matrices; fill them
  /// with set_utility(). Self-loops, duplicates and bad indices are rejected.
  void add_edge(Player i, Player j) {
    if (i >= players() || j >= players()) {
      fail(ErrorCode::kInvalidArgument, "edge endpoint out of range");
    }
    if (i == j) fail(ErrorCode::kInvalidArgument, "self-loop at player " + std::to_string(i));
    if (has_edge(i, j)) {
      fail(ErrorCode::kInvalidArgument,
           "duplicate edge " + std::to_string(i) + "," + std::to_string(j));
    }
    edges_.push_back(Edge::of(i, j));
    attach(i, j);
    attach(j, i);
  }

  void add_edge(Player i, Player j, Matrix u_ij, Matrix u_ji) {
    add_edge(i, j);
    set_utility(i, j, std::move(u_ij));
    set_utility(j, i, std::move(u_ji));
  }

  void set_utility(Player i, Player j, Matrix u) {
    auto it = index_.find(key(i, j));
    if (it == index_.end()) {
      fail(ErrorCode::kEdgeNotInGame,
           "no edge " + std::to_string(i) + "," + std::to_string(j));
    }
    matrices_[it->second] = std::move(u);
  }

  /// U_{i,j}; rows are player i's actions.
  const Matrix& utility(Player i, Player j) const {
    auto it = index_.find(key(i, j));
    if (it == index_.end()) {
      fail(ErrorCode::kMissingMatrix,
           "no utility for " + std::to_string(i) + "," + std::to_string(j));
    }
    return matrices_[it->second];
  }

  const Matrix& matrix(std::size_t index) const { return matrices_.at(index); }

 private:
  static std::uint64_t key(Player i, Player j) {
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
  }

  void attach(Player owner, Player other) {
    const std::size_t idx = matrices_.size();
    matrices_.emplace_back();
    index_.emplace(key(owner, other), idx);
    neighbors_[owner].push_back({other, idx});
  }

  std::vector<std::size_t> actions_;
  bool zero_sum_ = false;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<Matrix> matrices_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Checks every structural invariant of the model; throws on the first
/// violation found.
inline void validate_game(const PolymatrixGame& game) {
  if (game.players() == 0) fail(ErrorCode::kInvalidArgument, "game has no players");
  for (Player i = 0; i < game.players(); ++i) {
    if (game.actions(i) == 0) {
      fail(ErrorCode::kShapeMismatch, "player " + std::to_string(i) + " has no actions");
    }
  }
  for (Player i = 0; i < game.players(); ++i) {
    for (const auto& nb : game.neighbors(i)) {
      const Matrix& u = game.matrix(nb.matrix);
      const std::string tag = std::to_string(i) + "," + std::to_string(nb.player);
      if (u.rows == 0 && u.cols == 0) fail(ErrorCode::kMissingMatrix, "U_{" + tag + "} not set");
      if (u.rows != game.actions(i) || u.cols != game.actions(nb.player) ||
          u.values.size() != u.rows * u.cols) {
        fail(ErrorCode::kShapeMismatch, "U_{" + tag + "} has the wrong shape");
      }
      for (double x : u.values) {
        if (!std::isfinite(x)) fail(ErrorCode::kNonFiniteInput, "U_{" + tag + "} is not finite");
        if (!(x >= -1.0 && x <= 1.0)) {
          fail(ErrorCode::kBoundViolation, "U_{" + tag + "} entry outside [-1,1]");
        }
      }
    }
  }
  for (Player i = 0; i < game.players(); ++i) {
    if (game.degree(i) == 0) {
      fail(ErrorCode::kIsolatedPlayer, "player " + std::to_string(i) + " has no neighbors");
    }
  }
  if (game.zero_sum()) {
    for (const Edge& e : game.edges()) {
      const Matrix& a = game.utility(e.first, e.second);
      const Matrix& b = game.utility(e.second, e.first);
      for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < a.cols; ++c) {
          if (a(r, c) != -b(c, r)) {
            fail(ErrorCode::kZeroSumViolation,
                 "U_{" + std::to_string(e.second) + "," + std::to_string(e.first) +
                     "} is not the negated transpose");
          }
        }
      }
    }
  }
}

inline void validate_profile(const PolymatrixGame& game, const StrategyProfile& profile) {
  if (profile.size() != game.players()) {
    fail(ErrorCode::kInvalidProfile, "profile has the wrong number of players");
  }
  for (Player i = 0; i < game.players(); ++i) {
    if (profile[i].size() != game.actions(i)) {
      fail(ErrorCode::kInvalidProfile, "strategy " + std::to_string(i) + " has the wrong size");
    }
    if (!is_on_simplex(profile[i])) {
      fail(ErrorCode::kInvalidProfile, "strategy " + std::to_string(i) + " is off the simplex");
    }
  }
}

/// g_i = -(1/|N(i)|) sum_j U_{i,j} s_j, where s_j = strategy_of(neighbor index k,
/// neighbor player j). Shared by the public gradient entry points.
template <class StrategyOf>
void accumulate_gradient(const PolymatrixGame& game, Player i, StrategyOf&& strategy_of,
                         std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto nbrs = game.neighbors(i);
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    const Matrix& u = game.matrix(nbrs[k].matrix);
    std::span<const double> s = strategy_of(k, nbrs[k].player);
    for (std::size_t r = 0; r < u.rows; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < u.cols; ++c) acc += u(r, c) * s[c];
      out[r] += acc;
    }
  }
  const double scale = -1.0 / static_cast<double>(nbrs.size());
  for (double& x : out) x *= scale;
}

/// Gradient of player i's loss from the strategies it received, one per
/// neighbor in neighbors(i) order.
inline Vector gradient(const PolymatrixGame& game, std::span<const Vector> received, Player i) {
  const auto nbrs = game.neighbors(i);
  if (received.size() != nbrs.size()) {
    fail(ErrorCode::kNeighborCountMismatch,
         "player " + std::to_string(i) + " expects " + std::to_string(nbrs.size()) +
             " strategies, got " + std::to_string(received.size()));
  }
  if (nbrs.empty()) fail(ErrorCode::kIsolatedPlayer, "gradient of an isolated player");
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    if (received[k].size() != game.actions(nbrs[k].player)) {
      fail(ErrorCode::kDimMismatch, "received strategy has the wrong size");
    }
  }
  Vector g(game.actions(i));
  accumulate_gradient(
      game, i, [&](std::size_t k, Player) { return std::span<const double>(received[k]); }, g);
  return g;
}

/// Gradient of player i at the full profile.
inline Vector gradient_at(const PolymatrixGame& game, const StrategyProfile& profile, Player i) {
  Vector g(game.actions(i));
  accumulate_gradient(
      game, i, [&](std::size_t, Player j) { return std::span<const double>(profile[j]); }, g);
  return g;
}

inline std::vector<Vector> all_gradients(const PolymatrixGame& game, const StrategyProfile& profile) {
  std::vector<Vector> out(game.players());
  for (Player i = 0; i < game.players(); ++i) out[i] = gradient_at(game, profile, i);
  return out;
}

/// max over the simplex of <pi_i - x, g_i>, attained at a vertex.
inline double exploitability_from_gradient(std::span<const double> g, std::span<const double> pi) {
  const double best = *std::min_element(g.begin(), g.end());
  return std::max(dot(g, pi) - best, 0.0);
}

inline double exploitability(const PolymatrixGame& game, const StrategyProfile& profile, Player i) {
  validate_profile(game, profile);
  return exploitability_from_gradient(gradient_at(game, profile, i), profile[i]);
}

inline double avg_exploitability(const PolymatrixGame& game, const StrategyProfile& profile) {
  validate_profile(game, profile);
  double total = 0.0;
  for (Player i = 0; i < game.players(); ++i) {
    total += exploitability_from_gradient(gradient_at(game, profile, i), profile[i]);
  }
  return total / static_cast<double>(game.players());
}

/// Time-averaged regret of every player over the iterates, against the best
/// fixed pure action in hindsight. Values may be negative.
inline Vector time_avg_regrets(const PolymatrixGame& game, std::span<const StrategyProfile> iterates) {
  if (iterates.empty()) fail(ErrorCode::kEmptyTrace, "no iterates to average");
  const std::size_t n = game.players();
  std::vector<Vector> gradient_sum(n);
  Vector realized(n, 0.0);
  for (Player i = 0; i < n; ++i) gradient_sum[i].assign(game.actions(i), 0.0);
  Vector g;
  for (const StrategyProfile& profile : iterates) {
    for (Player i = 0; i < n; ++i) {
      g.assign(game.actions(i), 0.0);
      accumulate_gradient(
          game, i, [&](std::size_t, Player j) { return std::span<const double>(profile[j]); }, g);
      realized[i] += dot(g, profile[i]);
      for (std::size_t a = 0; a < g.size(); ++a) gradient_sum[i][a] += g[a];
    }
  }
  const double steps = static_cast<double>(iterates.size());
  Vector out(n);
  for (Player i = 0; i < n; ++i) {
    const double best = *std::min_element(gradient_sum[i].begin(), gradient_sum[i].end());
    out[i] = (realized[i] - best) / steps;
  }
  return out;
}

/// Player i's time-averaged regret against `comparator`, or against the best
/// pure action when no comparator is given.
inline double time_avg_regret(const PolymatrixGame& game, std::span<const StrategyProfile> iterates,
                              Player i,
                              std::optional<std::span<const double>> comparator = std::nullopt) {
  if (iterates.empty()) fail(ErrorCode::kEmptyTrace, "no iterates to average");
  Vector gradient_sum(game.actions(i), 0.0);
  double realized = 0.0;
  for (const StrategyProfile& profile : iterates) {
    const Vector g = gradient_at(game, profile, i);
    realized += dot(g, profile[i]);
    for (std::size_t a = 0; a < g.size(); ++a) gradient_sum[a] += g[a];
  }
  double reference;
  if (comparator) {
    if (!is_on_simplex(*comparator) || comparator->size() != gradient_sum.size()) {
      fail(ErrorCode::kInvalidProfile, "comparator is not a strategy of this player");
    }
    reference = dot(gradient_sum, *comparator);
  } else {
    reference = *std::min_element(gradient_sum.begin(), gradient_sum.end());
  }
  return (realized - reference) / static_cast<double>(iterates.size());
}

inline double clamp_regret(double regret) { return std::max(regret, 0.0); }

/// (1/N) sum_i max(regret_i, 0).
inline double avg_clamped_regret(const PolymatrixGame& game, std::span<const StrategyProfile> iterates) {
  const Vector regrets = time_avg_regrets(game, iterates);
  double total = 0.0;
  for (double r : regrets) total += clamp_regret(r);
  return total / static_cast<double>(regrets.size());
}

/// Unnormalized sum_i sum_{j in N(i)} pi_i^T U_{i,j} pi_j.
inline double zero_sum_residual(const PolymatrixGame& game, const StrategyProfile& profile) {
  validate_profile(game, profile);
  double total = 0.0;
  for (Player i = 0; i < game.players(); ++i) {
    for (const auto& nb : game.neighbors(i)) {
      const Matrix& u = game.matrix(nb.matrix);
      const Vector& pj = profile[nb.player];
      for (std::size_t r = 0; r < u.rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < u.cols; ++c) acc += u(r, c) * pj[c];
        total += profile[i][r] * acc;
      }
    }
  }
  return total;
}

/// sum_i <g_i(a) - g_i(b), a_i - b_i>; nonnegative on monotone games.
inline double monotonicity_gap(const PolymatrixGame& game, const StrategyProfile& a,
                               const StrategyProfile& b) {
  validate_profile(game, a);
  validate_profile(game, b);
  double total = 0.0;
  for (Player i = 0; i < game.players(); ++i) {
    const Vector ga = gradient_at(game, a, i);
    const Vector gb = gradient_at(game, b, i);
    for (std::size_t k = 0; k < ga.size(); ++k) total += (ga[k] - gb[k]) * (a[i][k] - b[i][k]);
  }
  return total;
}

inline StrategyProfile uniform_profile(const PolymatrixGame& game) {
  StrategyProfile p(game.players());
  for (Player i = 0; i < game.players(); ++i) p[i] = uniform_strategy(game.actions(i));
  return p;
}

inline StrategyProfile pure_profile(const PolymatrixGame& game, std::span<const std::size_t> actions) {
  if (actions.size() != game.players()) fail(ErrorCode::kInvalidProfile, "wrong number of actions");
  StrategyProfile p(game.players());
  for (Player i = 0; i < game.players(); ++i) {
    if (actions[i] >= game.actions(i)) fail(ErrorCode::kInvalidProfile, "action out of range");
    p[i].assign(game.actions(i), 0.0);
    p[i][actions[i]] = 1.0;
  }
  return p;
}

}  // namespace dpeq
