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
#include <set>
#include <span>
#include <vector>

#include "dpeq/dynamics.hpp"
#include "dpeq/game.hpp"
#include "dpeq/simplex.hpp"

namespace dpeq {

// Brute-force ground truth for small games. Nothing in here shares code
// paths with the closed-form metrics beyond the gradient itself.

struct OracleResult {
  StrategyProfile profile;
  Vector certificate;  // per-player best-response gap
  bool converged = false;
  std::size_t iterations = 0;

  double max_certificate() const {
    return certificate.empty() ? 0.0 : *std::max_element(certificate.begin(), certificate.end());
  }
};

namespace detail {

// Expected utility of each pure action of player i against the profile,
// (1/|N(i)|) sum_j sum_c U_{i,j}(a, c) pi_j(c), summed one action at a time.
inline Vector pure_action_payoffs(const PolymatrixGame& game, const StrategyProfile& profile, Player i) {
  Vector payoff(game.actions(i), 0.0);
  for (std::size_t a = 0; a < payoff.size(); ++a) {
    for (const auto& nb : game.neighbors(i)) {
      const Matrix& u = game.utility(i, nb.player);
      for (std::size_t c = 0; c < u.cols; ++c) payoff[a] += u(a, c) * profile[nb.player][c];
    }
    payoff[a] /= static_cast<double>(game.degree(i));
  }
  return payoff;
}

}  // namespace detail

/// Lowest-index utility maximizer (loss minimizer) for player i.
inline std::size_t best_response(const PolymatrixGame& game, const StrategyProfile& profile, Player i) {
  const Vector payoff = detail::pure_action_payoffs(game, profile, i);
  std::size_t best = 0;
  for (std::size_t a = 1; a < payoff.size(); ++a) {
    if (payoff[a] > payoff[best]) best = a;
  }
  return best;
}

/// Largest gain over every pure deviation, evaluated one deviation at a time.
inline double deviation_gap(const PolymatrixGame& game, const StrategyProfile& profile, Player i) {
  const Vector payoff = detail::pure_action_payoffs(game, profile, i);
  double current = 0.0;
  for (std::size_t a = 0; a < payoff.size(); ++a) current += payoff[a] * profile[i][a];
  double gap = 0.0;
  for (std::size_t a = 0; a < payoff.size(); ++a) gap = std::max(gap, payoff[a] - current);
  return gap;
}

inline Vector certificate_of(const PolymatrixGame& game, const StrategyProfile& profile) {
  Vector cert(game.players());
  for (Player i = 0; i < game.players(); ++i) cert[i] = deviation_gap(game, profile, i);
  return cert;
}

inline constexpr double kEquilibriumTolerance = 1e-9;

inline bool verify_pure_ne(const PolymatrixGame& game, std::span<const std::size_t> actions) {
  const StrategyProfile profile = pure_profile(game, actions);
  for (Player i = 0; i < game.players(); ++i) {
    if (deviation_gap(game, profile, i) > kEquilibriumTolerance) return false;
  }
  return true;
}

/// Simultaneous best-response iteration from the uniform profile. Stops when
/// the certificate drops to `tol` or a pure profile repeats (a cycle).
inline OracleResult best_response_dynamics(const PolymatrixGame& game, std::size_t max_iters,
                                           double tol) {
  OracleResult result;
  result.profile = uniform_profile(game);
  std::set<std::vector<std::size_t>> seen;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    result.certificate = certificate_of(game, result.profile);
    if (result.max_certificate() <= tol) {
      result.converged = true;
      return result;
    }
    std::vector<std::size_t> actions(game.players());
    for (Player i = 0; i < game.players(); ++i) actions[i] = best_response(game, result.profile, i);
    result.profile = pure_profile(game, actions);
    result.iterations = iter + 1;
    if (!seen.insert(actions).second) break;
  }
  result.certificate = certificate_of(game, result.profile);
  result.converged = result.max_certificate() <= tol;
  return result;
}

/// Noise-free limit of the dynamics: iterates the regularized proximal map
/// until successive iterates are within `tol`. The result estimates the
/// equilibrium of the tau-regularized game; its certificate holds each
/// player's fixed-point residual ||prox(pi_i) - pi_i||.
inline OracleResult regularized_fixed_point(const PolymatrixGame& game, const TauSchedule& tau,
                                            double eta, std::size_t max_iters, double tol) {
  auto step_all = [&](const StrategyProfile& from, StrategyProfile& to) {
    to.resize(game.players());
    for (Player i = 0; i < game.players(); ++i) {
      to[i] = proximal_step(from[i], gradient_at(game, from, i), eta, tau.tau[i]);
    }
  };
  OracleResult result;
  result.profile = uniform_profile(game);
  StrategyProfile next;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    step_all(result.profile, next);
    double step = 0.0;
    for (Player i = 0; i < game.players(); ++i) {
      const double d = distance(next[i], result.profile[i]);
      step += d * d;
    }
    result.profile.swap(next);
    result.iterations = iter + 1;
    if (std::sqrt(step) <= tol) break;
  }
  step_all(result.profile, next);
  result.certificate.resize(game.players());
  for (Player i = 0; i < game.players(); ++i) {
    result.certificate[i] = distance(next[i], result.profile[i]);
  }
  result.converged = result.max_certificate() <= tol;
  return result;
}

}  // namespace dpeq
