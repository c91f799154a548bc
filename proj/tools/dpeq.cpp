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


// Command-line front end: gen, run, audit, sweep, verify.

#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpeq/dpeq.hpp"

namespace {

using namespace dpeq;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;
constexpr int kExitZeroSigma = 5;

struct GenOptions {
  std::string kind = "dense";
  std::size_t n = 0;
  double p = 0.25;
  std::size_t c = 2;
  std::size_t actions = 4;
  bool zero_sum = false;
  std::uint64_t seed = 0;
  std::string out;
};

// Schedule flags shared by run and audit.
struct ScheduleFlags {
  std::string kind = "dense";
  std::optional<double> p_exponent;
  std::optional<double> eta;
  std::optional<double> sigma;
  std::optional<std::size_t> rounds;
  std::optional<double> tau_c;
  std::uint64_t seed = 0;
  std::size_t workers = 0;

  void add_to(CLI::App* app) {
    app->add_option("--kind", kind, "schedule regime")->check(CLI::IsMember({"dense", "sparse"}));
    app->add_option("--p-exponent", p_exponent, "dense schedule exponent (default: from Nbar)");
    app->add_option("--eta", eta, "step size override");
    app->add_option("--sigma", sigma, "noise scale override");
    app->add_option("--rounds", rounds, "round count override");
    app->add_option("--tau-c", tau_c, "regularization constant c override");
    app->add_option("--seed", seed, "noise seed");
    app->add_option("--workers", workers, "worker threads (default: DPEQ_THREADS or cores)");
  }

  RunConfig resolve(const PolymatrixGame& game) const {
    RunConfig config;
    if (!(eta && sigma && rounds)) {
      config = auto_schedule(game, parse_graph_kind(kind), game.max_actions(), p_exponent);
    }
    config = apply_overrides(config, ScheduleOverrides{eta, sigma, rounds, tau_c});
    config.master_seed = seed;
    config.workers = workers;
    validate_config(config);
    return config;
  }
};

struct RunOptions {
  std::string game;
  ScheduleFlags schedule;
  std::string trace_out;
  std::string metrics_out;
};

struct AuditCliOptions {
  std::string game;
  ScheduleFlags schedule;
  std::vector<std::size_t> edge;
  double alpha = 1.0;
  double delta = 1e-5;
  bool identical = false;
  std::uint64_t resample_seed = 0;
  std::string out;
  std::string budget_csv;
};

struct SweepCliOptions {
  std::string kind = "dense";
  std::vector<std::size_t> ns;
  double p = 0.25;
  std::size_t c = 2;
  std::size_t actions = 4;
  std::vector<std::uint64_t> seeds;
  std::size_t num_seeds = 10;
  double alpha = 1.0;
  bool zero_sum = false;
  std::optional<double> p_exponent;
  std::optional<double> eta;
  std::optional<double> sigma;
  std::optional<std::size_t> rounds;
  std::optional<double> tau_c;
  std::size_t workers = 0;
  std::string out;
};

struct VerifyOptions {
  bool full = false;
  std::size_t workers = 0;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path);
  out << text;
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
}

int report(const Error& e, int fallback) {
  std::cerr << "error: " << e.what() << '\n';
  switch (e.code()) {
    case ErrorCode::kIoError:
      return kExitIo;
    case ErrorCode::kDegenerateSchedule:
      return kExitDegenerate;
    case ErrorCode::kZeroSigma:
      return kExitZeroSigma;
    default:
      return fallback;
  }
}

int cmd_gen(const GenOptions& o) {
  try {
    const GraphKind kind = parse_graph_kind(o.kind);
    if (o.n < 2) fail(ErrorCode::kInvalidArgument, "--n must be at least 2");
    if (o.actions < 1) fail(ErrorCode::kInvalidArgument, "--actions must be positive");
    if (kind == GraphKind::kDense && !(o.p > 0.0 && o.p <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "--p must be in (0, 1]");
    }
    if (kind == GraphKind::kSparse && o.c < 1) fail(ErrorCode::kInvalidArgument, "--c must be positive");
    const PolymatrixGame game = generate(kind, o.n, o.p, o.c, o.actions, o.zero_sum, o.seed);
    write_text(o.out, game_to_string(game));
    std::cerr << "N=" << game.players() << " |E|=" << game.edges().size()
              << " Nbar=" << harmonic_mean_degree(game) << " Nmax=" << game.max_degree() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    return report(e, kExitUsage);
  }
}

int cmd_run(const RunOptions& o) {
  try {
    const PolymatrixGame game = load_game(o.game);
    const RunConfig config = o.schedule.resolve(game);
    const Trace trace = run(game, config);
    const RunMetrics metrics = compute_run_metrics(game, trace);
    if (!o.trace_out.empty()) save_trace(trace, o.trace_out);
    write_text(o.metrics_out, metrics_to_json(metrics, trace).dump(2) + "\n");
    return kExitOk;
  } catch (const Error& e) {
    return report(e, kExitFailure);
  }
}

int cmd_audit(const AuditCliOptions& o) {
  try {
    const PolymatrixGame game = load_game(o.game);
    const RunConfig config = o.schedule.resolve(game);
    AuditOptions ao;
    ao.alpha = o.alpha;
    ao.identical_resample = o.identical;
    ao.resample_seed = o.resample_seed;
    if (!o.edge.empty()) {
      if (o.edge.size() != 2) fail(ErrorCode::kInvalidArgument, "--edge takes two players");
      ao.edge = Edge::of(o.edge[0], o.edge[1]);
    }
    const PrivacyReport rep = audit(game, config, ao);
    nlohmann::json j = report_to_json(rep, o.delta);
    j["config"] = config_to_json(config);
    write_text(o.out, j.dump(2) + "\n");
    if (!o.budget_csv.empty()) {
      std::ostringstream csv;
      write_budget_csv(rep, csv);
      write_text(o.budget_csv, csv.str());
    }
    return kExitOk;
  } catch (const Error& e) {
    return report(e, kExitFailure);
  }
}

int cmd_sweep(const SweepCliOptions& o) {
  try {
    SweepConfig cfg;
    cfg.kind = parse_graph_kind(o.kind);
    cfg.ns = o.ns;
    cfg.p = o.p;
    cfg.c = o.c;
    cfg.actions = o.actions;
    cfg.seeds = o.seeds;
    if (cfg.seeds.empty()) {
      for (std::size_t k = 0; k < o.num_seeds; ++k) cfg.seeds.push_back(k + 1);
    }
    cfg.alpha = o.alpha;
    cfg.zero_sum = o.zero_sum;
    cfg.p_exponent = o.p_exponent;
    cfg.overrides = ScheduleOverrides{o.eta, o.sigma, o.rounds, o.tau_c};
    cfg.workers = o.workers;
    const std::vector<SweepRow> rows = run_sweep(cfg);
    std::ostringstream csv;
    write_sweep_csv(rows, csv);
    write_text(o.out, csv.str());
    std::size_t ok = 0;
    for (const SweepRow& r : rows) ok += r.status == "ok" ? 1 : 0;
    std::cerr << ok << "/" << rows.size() << " rows succeeded\n";
    return ok > 0 ? kExitOk : kExitFailure;
  } catch (const Error& e) {
    return report(e, kExitUsage);
  }
}

int cmd_verify(const VerifyOptions& o) {
  CheckOptions options;
  options.reduced = !o.full;
  options.workers = o.workers;
  options.corrupt_fixture = corrupt_fixture_from_env();
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_checks(options, &std::cout);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  const std::size_t blocking = blocking_failures(results);
  std::cout << (results.size() - failed) << "/" << results.size() << " checks passed, "
            << (failed - blocking) << " documented failure(s), " << blocking << " blocking, in " << secs
            << " s\n";
  if (secs > 300.0) std::cerr << "warning: verify took longer than 5 minutes\n";
  return blocking == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private equilibrium finding in polymatrix games"};
  app.set_config("--config", "", "key = value config file mirroring the flags");
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random polymatrix game");
  gen_cmd->add_option("--kind", gen.kind, "dense (Erdos-Renyi) or sparse (bounded degree)")
      ->check(CLI::IsMember({"dense", "sparse"}));
  gen_cmd->add_option("--n", gen.n, "number of players")->required();
  gen_cmd->add_option("--p", gen.p, "edge probability (dense)");
  gen_cmd->add_option("--c", gen.c, "degree multiplicity (sparse)");
  gen_cmd->add_option("--actions", gen.actions, "actions per player");
  gen_cmd->add_flag("--zero-sum", gen.zero_sum, "zero-sum utilities");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output JSON path (default stdout)");

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "run the private dynamics on a game");
  run_cmd->add_option("--game", run_opts.game, "game JSON")->required();
  run_opts.schedule.add_to(run_cmd);
  run_cmd->add_option("--trace-out", run_opts.trace_out, "trace CSV path (JSON sidecar written next to it)");
  run_cmd->add_option("--metrics-out", run_opts.metrics_out, "metrics JSON path (default stdout)");

  AuditCliOptions audit_opts;
  auto* audit_cmd = app.add_subcommand("audit", "measure privacy loss on an adjacent game");
  audit_cmd->add_option("--game", audit_opts.game, "game JSON")->required();
  audit_opts.schedule.add_to(audit_cmd);
  audit_cmd->add_option("--edge", audit_opts.edge, "edge to resample, as two players")->expected(2);
  audit_cmd->add_option("--alpha", audit_opts.alpha, "Renyi order");
  audit_cmd->add_option("--delta", audit_opts.delta, "delta for the (eps, delta) conversion");
  audit_cmd->add_flag("--identical", audit_opts.identical, "use an adjacent game equal to the input");
  audit_cmd->add_option("--resample-seed", audit_opts.resample_seed, "seed for edge choice and resampling");
  audit_cmd->add_option("--out", audit_opts.out, "report JSON path (default stdout)");
  audit_cmd->add_option("--budget-csv", audit_opts.budget_csv, "per-player empirical budget CSV");

  SweepCliOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep player counts and seeds");
  sweep_cmd->add_option("--kind", sweep_opts.kind, "dense or sparse")
      ->check(CLI::IsMember({"dense", "sparse"}));
  sweep_cmd->add_option("--n", sweep_opts.ns, "player counts, increasing")->required()->delimiter(',');
  sweep_cmd->add_option("--p", sweep_opts.p, "edge probability (dense)");
  sweep_cmd->add_option("--c", sweep_opts.c, "degree multiplicity (sparse)");
  sweep_cmd->add_option("--actions", sweep_opts.actions, "actions per player");
  sweep_cmd->add_option("--seeds", sweep_opts.seeds, "explicit seed list")->delimiter(',');
  sweep_cmd->add_option("--num-seeds", sweep_opts.num_seeds, "seeds 1..k when --seeds is absent");
  sweep_cmd->add_option("--alpha", sweep_opts.alpha, "Renyi order");
  sweep_cmd->add_flag("--zero-sum", sweep_opts.zero_sum, "zero-sum utilities");
  sweep_cmd->add_option("--p-exponent", sweep_opts.p_exponent, "dense schedule exponent");
  sweep_cmd->add_option("--eta", sweep_opts.eta, "step size override");
  sweep_cmd->add_option("--sigma", sweep_opts.sigma, "noise scale override");
  sweep_cmd->add_option("--rounds", sweep_opts.rounds, "round count override");
  sweep_cmd->add_option("--tau-c", sweep_opts.tau_c, "regularization constant override");
  sweep_cmd->add_option("--workers", sweep_opts.workers, "worker threads");
  sweep_cmd->add_option("--out", sweep_opts.out, "CSV path (default stdout)");

  VerifyOptions verify_opts;
  auto* verify_cmd = app.add_subcommand("verify", "run the property checks");
  verify_cmd->add_flag("--full", verify_opts.full, "run at full acceptance size");
  verify_cmd->add_option("--workers", verify_opts.workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    // A config file that cannot be read is an I/O failure, anything else a usage error.
    return dynamic_cast<const CLI::FileError*>(&e) != nullptr ? kExitIo : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*run_cmd) return cmd_run(run_opts);
    if (*audit_cmd) return cmd_audit(audit_opts);
    if (*sweep_cmd) return cmd_sweep(sweep_opts);
    if (*verify_cmd) return cmd_verify(verify_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
