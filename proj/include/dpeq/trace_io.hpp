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

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "dpeq/dynamics.hpp"
#include "dpeq/error.hpp"

namespace dpeq {

/// Shortest decimal string that parses back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) fail(ErrorCode::kIoError, "cannot format double");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::kParseError, "not a number: " + std::string(text));
  }
  return x;
}

inline nlohmann::json config_to_json(const RunConfig& config, const TauSchedule* tau = nullptr) {
  nlohmann::json j;
  j["eta"] = config.eta;
  j["sigma"] = config.sigma;
  j["rounds"] = config.rounds;
  if (config.tau_constant) {
    j["tau_constant"] = *config.tau_constant;
  } else if (tau != nullptr) {
    j["tau_constant"] = tau->constant;
  } else {
    j["tau_constant"] = nullptr;
  }
  j["master_seed"] = config.master_seed;
  j["record_noise"] = config.record_noise;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig config;
    config.eta = j.at("eta").get<double>();
    config.sigma = j.at("sigma").get<double>();
    config.rounds = j.at("rounds").get<std::size_t>();
    if (j.contains("tau_constant") && !j["tau_constant"].is_null()) {
      config.tau_constant = j["tau_constant"].get<double>();
    }
    config.master_seed = j.value("master_seed", std::uint64_t{0});
    config.record_noise = j.value("record_noise", false);
    validate_config(config);
    return config;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kParseError, ex.what());
  }
}

// Trace CSV: header "t,player,kind,a0,...,a{Amax-1}". kind is "clean" for
// pi^(t), t = 0..T, and "obs" for the broadcasts pi^(t) + n^(t), t = 0..T-1,
// when they were recorded. Players with fewer actions leave trailing cells
// empty.
inline void write_trace_csv(const Trace& trace, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& s : trace.clean.front()) width = std::max(width, s.size());
  out << "t,player,kind";
  for (std::size_t a = 0; a < width; ++a) out << ",a" << a;
  out << '\n';
  auto emit = [&](std::size_t t, std::size_t player, std::string_view kind, const Vector& v) {
    out << t << ',' << player << ',' << kind;
    for (std::size_t a = 0; a < width; ++a) {
      out << ',';
      if (a < v.size()) out << format_double(v[a]);
    }
    out << '\n';
  };
  for (std::size_t t = 0; t < trace.clean.size(); ++t) {
    for (std::size_t i = 0; i < trace.clean[t].size(); ++i) emit(t, i, "clean", trace.clean[t][i]);
    if (t < trace.observations.size()) {
      for (std::size_t i = 0; i < trace.observations[t].size(); ++i) {
        emit(t, i, "obs", trace.observations[t][i]);
      }
    }
  }
}

inline void save_trace(const Trace& trace, const std::filesystem::path& csv_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) fail(ErrorCode::kIoError, "cannot write " + csv_path.string());
  write_trace_csv(trace, csv);
  std::filesystem::path sidecar = csv_path;
  sidecar += ".json";
  std::ofstream side(sidecar, std::ios::binary);
  if (!side) fail(ErrorCode::kIoError, "cannot write " + sidecar.string());
  side << config_to_json(trace.config, &trace.tau).dump(2) << '\n';
}

/// Rows of a trace CSV: (t, player, kind, values).
struct TraceRow {
  std::size_t t = 0;
  std::size_t player = 0;
  std::string kind;
  Vector values;
};

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kParseError, "empty trace csv");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() < 3) fail(ErrorCode::kParseError, "short trace row");
    TraceRow row;
    row.t = static_cast<std::size_t>(parse_double(cells[0]));
    row.player = static_cast<std::size_t>(parse_double(cells[1]));
    row.kind = std::string(cells[2]);
    for (std::size_t k = 3; k < cells.size(); ++k) {
      if (!cells[k].empty()) row.values.push_back(parse_double(cells[k]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dpeq
