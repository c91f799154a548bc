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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dpeq/error.hpp"
#include "dpeq/game.hpp"

namespace dpeq {

// Game files are JSON:
//   {"n": 3, "actions": [2,2,2], "zero_sum": false, "edges": [[0,1],[1,2]],
//    "utilities": {"0,1": [[...]], "1,0": [[...]], ...}}
// with 0-based players. Doubles are written in shortest round-trip form.

inline nlohmann::json game_to_json(const PolymatrixGame& game) {
  nlohmann::json j;
  j["n"] = game.players();
  j["actions"] = game.action_counts();
  j["zero_sum"] = game.zero_sum();
  auto edges = nlohmann::json::array();
  auto utilities = nlohmann::json::object();
  auto matrix_json = [](const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
      auto row = nlohmann::json::array();
      for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  for (const Edge& e : game.edges()) {
    edges.push_back({e.first, e.second});
    utilities[std::to_string(e.first) + "," + std::to_string(e.second)] =
        matrix_json(game.utility(e.first, e.second));
    utilities[std::to_string(e.second) + "," + std::to_string(e.first)] =
        matrix_json(game.utility(e.second, e.first));
  }
  j["edges"] = std::move(edges);
  j["utilities"] = std::move(utilities);
  return j;
}

/// Parses a game document. Structural problems surface as ParseError or the
/// validation error codes; the result is validated before it is returned.
inline PolymatrixGame game_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    auto actions = j.at("actions").get<std::vector<std::size_t>>();
    if (actions.size() != n) fail(ErrorCode::kShapeMismatch, "actions list does not match n");
    PolymatrixGame game(std::move(actions), j.value("zero_sum", false));
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail(ErrorCode::kParseError, "edge must be [i,j]");
      game.add_edge(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    for (const auto& [key, rows] : j.at("utilities").items()) {
      const auto comma = key.find(',');
      if (comma == std::string::npos) fail(ErrorCode::kParseError, "bad utility key " + key);
      const auto i = static_cast<Player>(std::stoull(key.substr(0, comma)));
      const auto k = static_cast<Player>(std::stoull(key.substr(comma + 1)));
      if (i >= n || k >= n || !game.has_edge(i, k)) {
        fail(ErrorCode::kShapeMismatch, "utility " + key + " is not on an edge");
      }
      Matrix m;
      m.rows = rows.size();
      m.cols = m.rows == 0 ? 0 : rows[0].size();
      for (const auto& row : rows) {
        if (row.size() != m.cols) fail(ErrorCode::kShapeMismatch, "ragged utility " + key);
        for (const auto& x : row) m.values.push_back(x.get<double>());
      }
      game.set_utility(i, k, std::move(m));
    }
    validate_game(game);
    return game;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kParseError, ex.what());
  } catch (const std::logic_error& ex) {
    fail(ErrorCode::kParseError, ex.what());
  }
}

inline std::string game_to_string(const PolymatrixGame& game) {
  return game_to_json(game).dump() + "\n";
}

inline void save_game(const PolymatrixGame& game, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << game_to_string(game);
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

inline PolymatrixGame load_game(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kParseError, ex.what());
  }
  return game_from_json(j);
}

}  // namespace dpeq
