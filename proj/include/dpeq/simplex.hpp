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
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dpeq/error.hpp"

namespace dpeq {

using Vector = std::vector<double>;

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::kNonFiniteInput, what);
  }
}

// True when v is on the simplex up to floating-point roundoff of its sum.
inline bool on_simplex_exactly(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (x < 0.0) return false;
    sum += x;
  }
  const double slack =
      4.0 * static_cast<double>(v.size()) * std::numeric_limits<double>::epsilon();
  return std::abs(sum - 1.0) <= slack;
}

inline void clamp_tiny_negatives(std::span<double> v) {
  for (double& x : v) {
    if (x <= 0.0 && x > -1e-12) x = 0.0;  // also turns -0.0 into +0.0
  }
}

}  // namespace detail

/// Euclidean projection onto the probability simplex, argmin_x ||x - v||^2
/// over {x >= 0, sum x = 1}. Sort-and-threshold, O(d log d).
///
/// Inputs already on the simplex (within summation roundoff) are returned
/// unchanged, which makes the projection bitwise idempotent.
inline Vector project_simplex(std::span<const double> v) {
  if (v.empty()) fail(ErrorCode::kDimMismatch, "projection of an empty vector");
  detail::require_finite(v, "projection input has non-finite entries");

  Vector out(v.begin(), v.end());
  if (detail::on_simplex_exactly(v)) {
    detail::clamp_tiny_negatives(out);
    return out;
  }

  Vector sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    // The support is the longest prefix whose entries stay above the level.
    if (sorted[k] - candidate > 0.0) threshold = candidate;
  }
  for (double& x : out) x = std::max(x - threshold, 0.0);
  detail::clamp_tiny_negatives(out);
  return out;
}

/// Regularized proximal step: Proj((pi_bar - eta * g) / (1 + eta * tau)).
/// With tau = 0 this is a plain projected-gradient step.
inline Vector proximal_step(std::span<const double> pi_bar,
                            std::span<const double> gradient, double eta,
                            double tau) {
  if (pi_bar.size() != gradient.size()) {
    fail(ErrorCode::kDimMismatch, "strategy and gradient sizes differ");
  }
  if (!(eta > 0.0)) fail(ErrorCode::kNonPositiveEta, "eta must be positive");
  if (!(tau >= 0.0)) fail(ErrorCode::kInvalidArgument, "tau must be nonnegative");

  const double scale = 1.0 + eta * tau;
  Vector shifted(pi_bar.size());
  for (std::size_t k = 0; k < shifted.size(); ++k) {
    shifted[k] = (pi_bar[k] - eta * gradient[k]) / scale;
  }
  return project_simplex(shifted);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kDimMismatch, "dot of unequal sizes");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kDimMismatch, "distance of unequal sizes");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline bool is_on_simplex(std::span<const double> v, double tol = 1e-9) {
  if (v.empty()) return false;
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

inline Vector uniform_strategy(std::size_t actions) {
  return Vector(actions, 1.0 / static_cast<double>(actions));
}

}  // namespace dpeq
