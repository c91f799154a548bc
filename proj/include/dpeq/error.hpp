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

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpeq {

enum class ErrorCode {
  kBoundViolation,
  kMissingMatrix,
  kShapeMismatch,
  kIsolatedPlayer,
  kZeroSumViolation,
  kNeighborCountMismatch,
  kNonFiniteInput,
  kDimMismatch,
  kNonPositiveEta,
  kInvalidProfile,
  kEmptyTrace,
  kTooFewPlayers,
  kNotAdjacent,
  kDegenerateSchedule,
  kFixtureTooLarge,
  kEdgeNotInGame,
  kZeroSigma,
  kTraceMismatch,
  kInvalidAlpha,
  kInvalidDelta,
  kInvalidArgument,
  kParseError,
  kIoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBoundViolation: return "BoundViolation";
    case ErrorCode::kMissingMatrix: return "MissingMatrix";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kIsolatedPlayer: return "IsolatedPlayer";
    case ErrorCode::kZeroSumViolation: return "ZeroSumViolation";
    case ErrorCode::kNeighborCountMismatch: return "NeighborCountMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNonPositiveEta: return "NonPositiveEta";
    case ErrorCode::kInvalidProfile: return "InvalidProfile";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kTooFewPlayers: return "TooFewPlayers";
    case ErrorCode::kNotAdjacent: return "NotAdjacent";
    case ErrorCode::kDegenerateSchedule: return "DegenerateSchedule";
    case ErrorCode::kFixtureTooLarge: return "FixtureTooLarge";
    case ErrorCode::kEdgeNotInGame: return "EdgeNotInGame";
    case ErrorCode::kZeroSigma: return "ZeroSigma";
    case ErrorCode::kTraceMismatch: return "TraceMismatch";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kInvalidDelta: return "InvalidDelta";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported as a dpeq::Error carrying a code
/// that callers (and the CLI exit-code mapping) can switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dpeq
