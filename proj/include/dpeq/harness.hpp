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
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dpeq/dynamics.hpp"
#include "dpeq/error.hpp"
#include "dpeq/game.hpp"
#include "dpeq/graph_gen.hpp"
#include "dpeq/parallel.hpp"
#include "dpeq/privacy.hpp"
#include "dpeq/rng.hpp"
#include "dpeq/trace_io.hpp"

namespace dpeq {

enum class GraphKind { kDense, kSparse };

inline GraphKind parse_graph_kind(std::string_view s) {
  if (s == "dense") return GraphKind::kDense;
  if (s == "sparse") return GraphKind::kSparse;
  fail(ErrorCode::kInvalidArgument, "unknown graph kind " + std::string(s));
}

inline std::string_view to_string(GraphKind kind) {
  return kind == GraphKind::kDense ? "dense" : "sparse";
}

/// Fields that replace the schedule's values when set.
struct ScheduleOverrides {
  std::optional<double> eta;
  std::optional<double> sigma;
  std::optional<std::size_t> rounds;
  std::optional<double> tau_constant;
};

/// Exponent p with Nbar = N^p, clipped into (0, 1].
inline double effective_density_exponent(const PolymatrixGame& game) {
  const double p = std::log(harmonic_mean_degree(game)) / std::log(static_cast<double>(game.players()));
  return std::clamp(p, 1e-6, 1.0);
}

/// The accuracy/privacy trade-off schedule for the game's regime. Dense
/// graphs take the exponent p from the caller or from the realized Nbar.
inline RunConfig auto_schedule(const PolymatrixGame& game, GraphKind kind, std::size_t actions,
                               std::optional<double> p_exponent = std::nullopt) {
  const std::size_t n = game.players();
  if (kind == GraphKind::kDense) {
    const double p = p_exponent ? *p_exponent : effective_density_exponent(game);
    return hyperparams_dense(n, p, clubsuit(game, actions));
  }
  const std::size_t rounds = sparse_rounds(n, game.max_degree());
  return hyperparams_sparse(n, game.max_degree(), spadesuit_worst_case(game, rounds, actions));
}

inline RunConfig apply_overrides(RunConfig config, const ScheduleOverrides& o) {
  if (o.eta) config.eta = *o.eta;
  if (o.sigma) config.sigma = *o.sigma;
  if (o.rounds) config.rounds = *o.rounds;
  if (o.tau_constant) config.tau_constant = *o.tau_constant;
  return config;
}

/// Uniformly random edge, chosen from `seed`.
inline Edge pick_edge(const PolymatrixGame& game, std::uint64_t seed) {
  if (game.edges().empty()) fail(ErrorCode::kEdgeNotInGame, "game has no edges");
  SplitMix64 rng(stream_seed(seed, 0xED6E, 0));
  return game.edges()[uniform_index(rng, game.edges().size())];
}

/// Adjacent game: `edge` gets freshly drawn U[-1, 1] utilities (the reverse
/// direction is the negated transpose for zero-sum games).
inline PolymatrixGame resample_edge(const PolymatrixGame& game, Edge edge, std::uint64_t seed) {
  if (!game.has_edge(edge.first, edge.second)) fail(ErrorCode::kEdgeNotInGame, "cannot resample");
  PolymatrixGame out = game;
  SplitMix64 rng(stream_seed(seed, 0xADCE, edge.first * 0x100000001ULL + edge.second));
  Matrix forward = detail::random_matrix(rng, game.actions(edge.first), game.actions(edge.second));
  Matrix backward = game.zero_sum() ? forward.negated_transpose()
                                    : detail::random_matrix(rng, game.actions(edge.second),
                                                            game.actions(edge.first));
  out.set_utility(edge.first, edge.second, std::move(forward));
  out.set_utility(edge.second, edge.first, std::move(backward));
  return out;
}

// ---------------------------------------------------------------------------
// run metrics

struct RunMetrics {
  std::vector<std::pair<std::size_t, double>> checkpoints;  // (t, avg exploitability of pi^(t))
  Vector final_regret;                                      // time-averaged, per player
  double avg_clamped_regret = 0.0;
  double sigma_sqrt_t = 0.0;
};

inline std::size_t checkpoint_stride(std::size_t rounds) { return std::max<std::size_t>(1, rounds / 20); }

inline RunMetrics compute_run_metrics(const PolymatrixGame& game, const Trace& trace) {
  RunMetrics m;
  const std::size_t rounds = trace.rounds();
  const std::size_t stride = checkpoint_stride(rounds);
  for (std::size_t t = 0; t <= rounds; t += stride) {
    m.checkpoints.emplace_back(t, avg_exploitability(game, trace.clean[t]));
  }
  if (m.checkpoints.back().first != rounds) {
    m.checkpoints.emplace_back(rounds, avg_exploitability(game, trace.clean[rounds]));
  }
  m.final_regret = time_avg_regrets(game, trace.iterates());
  double total = 0.0;
  for (double r : m.final_regret) total += clamp_regret(r);
  m.avg_clamped_regret = total / static_cast<double>(m.final_regret.size());
  m.sigma_sqrt_t = trace.config.sigma * std::sqrt(static_cast<double>(rounds));
  return m;
}

inline nlohmann::json metrics_to_json(const RunMetrics& m, const Trace& trace) {
  nlohmann::json j;
  j["config"] = config_to_json(trace.config, &trace.tau);
  auto cps = nlohmann::json::array();
  for (const auto& [t, v] : m.checkpoints) cps.push_back({{"t", t}, {"avg_exploitability", v}});
  j["checkpoints"] = std::move(cps);
  j["final_time_avg_regret"] = m.final_regret;
  j["avg_clamped_regret"] = m.avg_clamped_regret;
  j["sigma_sqrt_t"] = m.sigma_sqrt_t;
  return j;
}

// ---------------------------------------------------------------------------
// privacy audit

struct AuditOptions {
  double alpha = 1.0;
  std::optional<Edge> edge;        // audited edge; default: picked from the seed
  bool identical_resample = false;  // adjacent game equal to the original
  std::uint64_t resample_seed = 0;
};

/// Runs the game and an adjacent copy with shared noise and compares the
/// realized divergence with the closed-form bound. Without an explicit edge
/// the reported spadesuit is the worst case over all edges.
inline PrivacyReport audit(const PolymatrixGame& game, const RunConfig& config,
                           const AuditOptions& options) {
  validate_game(game);
  if (config.sigma == 0.0) fail(ErrorCode::kZeroSigma, "auditing requires sigma > 0");
  if (!(options.alpha >= 1.0)) fail(ErrorCode::kInvalidAlpha, "alpha must be >= 1");
  const std::size_t actions = game.max_actions();
  const Edge edge = options.edge ? Edge::of(options.edge->first, options.edge->second)
                                 : pick_edge(game, options.resample_seed);
  if (!game.has_edge(edge.first, edge.second)) fail(ErrorCode::kEdgeNotInGame, "audit edge");
  const PolymatrixGame adjacent =
      options.identical_resample ? game : resample_edge(game, edge, options.resample_seed);
  const CoupledTraces coupled = run_coupled(game, adjacent, config);
  const EmpiricalBudget empirical = empirical_budget(coupled.a, coupled.b, config.sigma, options.alpha);

  PrivacyReport report;
  report.alpha = options.alpha;
  report.edge = edge;
  report.clubsuit = clubsuit(game, actions);
  report.spadesuit = options.edge ? spadesuit(game, config.rounds, edge, actions)
                                  : spadesuit_worst_case(game, config.rounds, actions);
  report.theoretical_budget = theoretical_budget(options.alpha, config.eta, config.sigma, config.rounds,
                                                 report.clubsuit, report.spadesuit);
  report.empirical_budget_per_player = empirical.per_player;
  report.empirical_budget_avg = empirical.average;
  return report;
}

inline nlohmann::json report_to_json(const PrivacyReport& r, double delta = 1e-5) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["clubsuit"] = r.clubsuit;
  j["spadesuit"] = r.spadesuit;
  j["theoretical_budget"] = std::isinf(r.theoretical_budget) ? nlohmann::json("inf")
                                                              : nlohmann::json(r.theoretical_budget);
  j["empirical_budget_avg"] = r.empirical_budget_avg;
  j["empirical_budget_per_player"] = r.empirical_budget_per_player;
  if (r.edge) j["edge"] = {r.edge->first, r.edge->second};
  j["delta"] = delta;
  if (r.alpha > 1.0 && std::isfinite(r.theoretical_budget)) {
    j["dp_epsilon"] = r.dp_epsilon(delta);
  } else {
    j["dp_epsilon"] = nullptr;  // the conversion needs alpha > 1
  }
  return j;
}

inline void write_budget_csv(const PrivacyReport& r, std::ostream& out) {
  out << "player,empirical_budget\n";
  for (std::size_t i = 0; i < r.empirical_budget_per_player.size(); ++i) {
    out << i << ',' << format_double(r.empirical_budget_per_player[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepConfig {
  GraphKind kind = GraphKind::kDense;
  std::vector<std::size_t> ns;
  double p = 0.25;      // dense edge probability
  std::size_t c = 2;    // sparse multiplicity
  std::size_t actions = 4;
  std::vector<std::uint64_t> seeds;
  double alpha = 1.0;
  bool zero_sum = false;
  std::optional<double> p_exponent;  // dense schedule exponent
  ScheduleOverrides overrides;
  std::size_t workers = 0;
};

inline void validate_sweep(const SweepConfig& config) {
  if (config.ns.empty()) fail(ErrorCode::kInvalidArgument, "sweep needs at least one N");
  for (std::size_t k = 1; k < config.ns.size(); ++k) {
    if (config.ns[k] <= config.ns[k - 1]) fail(ErrorCode::kInvalidArgument, "N list must increase");
  }
  if (config.seeds.empty()) fail(ErrorCode::kInvalidArgument, "sweep needs at least one seed");
  if (!(config.alpha >= 1.0)) fail(ErrorCode::kInvalidAlpha, "alpha must be >= 1");
}

struct SweepRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  double eta = 0.0;
  double sigma = 0.0;
  double avg_exploitability = 0.0;  // (1/N) sum_i max(time-avg regret_i, 0)
  double eps_theory = 0.0;
  double eps_empirical = 0.0;
  double clubsuit = 0.0;
  double spadesuit = 0.0;
  double wall_ms = 0.0;
  std::string status = "ok";
};

inline constexpr std::string_view kSweepHeader =
    "n,seed,t_rounds,eta,sigma,avg_exploitability,eps_theory,eps_empirical,clubsuit,spadesuit,"
    "wall_ms,status";

inline PolymatrixGame generate(GraphKind kind, std::size_t n, double p, std::size_t c,
                               std::size_t actions, bool zero_sum, std::uint64_t seed) {
  return kind == GraphKind::kDense ? gen_dense(n, p, actions, zero_sum, seed)
                                   : gen_sparse(n, c, actions, zero_sum, seed);
}

/// One (N, seed) cell: generate, schedule, run the coupled pair on a random
/// edge, and evaluate accuracy and both budgets.
inline SweepRow sweep_row(const SweepConfig& config, std::size_t n, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row;
  row.n = n;
  row.seed = seed;
  try {
    const PolymatrixGame game =
        generate(config.kind, n, config.p, config.c, config.actions, config.zero_sum, seed);
    RunConfig run_config =
        apply_overrides(auto_schedule(game, config.kind, config.actions, config.p_exponent), config.overrides);
    run_config.master_seed = stream_seed(seed, n, 0x5EED);
    run_config.workers = 1;
    row.rounds = run_config.rounds;
    row.eta = run_config.eta;
    row.sigma = run_config.sigma;

    const Edge edge = pick_edge(game, seed);
    const PolymatrixGame adjacent = resample_edge(game, edge, seed);
    const CoupledTraces coupled = run_coupled(game, adjacent, run_config);

    row.avg_exploitability = avg_clamped_regret(game, coupled.a.iterates());
    row.clubsuit = clubsuit(game, config.actions);
    row.spadesuit = spadesuit_worst_case(game, run_config.rounds, config.actions);
    row.eps_theory = theoretical_budget(config.alpha, run_config.eta, run_config.sigma,
                                        run_config.rounds, row.clubsuit, row.spadesuit);
    row.eps_empirical = run_config.sigma > 0.0
                            ? empirical_budget(coupled.a, coupled.b, run_config.sigma, config.alpha).average
                            : kInfinity;
  } catch (const Error& e) {
    row.status = "error:" + std::string(to_string(e.code()));
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Rows in (N ascending, seed in given order) order. Cells run in parallel;
/// each writes only its own slot.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  validate_sweep(config);
  std::vector<std::pair<std::size_t, std::uint64_t>> cells;
  for (std::size_t n : config.ns)
    for (std::uint64_t s : config.seeds) cells.emplace_back(n, s);
  std::vector<SweepRow> rows(cells.size());
  parallel_for(cells.size(), resolve_workers(config.workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) rows[k] = sweep_row(config, cells[k].first, cells[k].second);
  });
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    out << r.n << ',' << r.seed << ',' << r.rounds << ',' << format_double(r.eta) << ','
        << format_double(r.sigma) << ',' << format_double(r.avg_exploitability) << ','
        << format_double(r.eps_theory) << ',' << format_double(r.eps_empirical) << ','
        << format_double(r.clubsuit) << ',' << format_double(r.spadesuit) << ','
        << format_double(std::round(r.wall_ms * 1000.0) / 1000.0) << ',' << r.status << '\n';
  }
}

inline std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::kParseError, "not an unsigned integer: " + std::string(text));
  }
  return x;
}

/// Parses a sweep CSV written by write_sweep_csv. The header must match
/// exactly.
inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    fail(ErrorCode::kParseError, "sweep csv header mismatch");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 12) fail(ErrorCode::kParseError, "sweep row needs 12 cells: " + line);
    SweepRow r;
    r.n = static_cast<std::size_t>(parse_u64(cells[0]));
    r.seed = parse_u64(cells[1]);
    r.rounds = static_cast<std::size_t>(parse_u64(cells[2]));
    r.eta = parse_double(cells[3]);
    r.sigma = parse_double(cells[4]);
    r.avg_exploitability = parse_double(cells[5]);
    r.eps_theory = parse_double(cells[6]);
    r.eps_empirical = parse_double(cells[7]);
    r.clubsuit = parse_double(cells[8]);
    r.spadesuit = parse_double(cells[9]);
    r.wall_ms = parse_double(cells[10]);
    r.status = cells[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Mean of `field` over the successful rows with the given N.
template <class Field>
double mean_over(const std::vector<SweepRow>& rows, std::size_t n, Field field) {
  double total = 0.0;
  std::size_t count = 0;
  for (const SweepRow& r : rows) {
    if (r.n != n || r.status != "ok") continue;
    total += field(r);
    ++count;
  }
  return count == 0 ? std::nan("") : total / static_cast<double>(count);
}

}  // namespace dpeq
