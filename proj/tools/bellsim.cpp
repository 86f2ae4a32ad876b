// bellsim: command-line driver for the spin and colored-ball simulations.
//
// Exit codes: 0 every check passed, 1 a check failed, 2 usage or
// configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bellsim/ball_protocol.hpp"
#include "bellsim/report.hpp"

namespace {

using namespace bellsim;
using namespace bellsim::cli;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string out;
  std::string format = "json";
  bool no_timestamp = false;
  unsigned workers = 1;
  std::string config;
};

struct AllSettings {
  SpinCorrelationSettings spin;
  McRunSettings mc;
  BallProtocolSettings ball;
  CommonCauseSettings cause;
  ChshSettings chsh;
};

json load_config(const std::string& path, const std::string& subcommand) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config '" + path + "'");
  json doc;
  try {
    f >> doc;
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_for(doc, subcommand);
}

void add_globals(CLI::App& app, Globals& g) {
  app.add_option("--seed", g.seed, "RNG seed (u64)");
  app.add_option("--trials", g.trials, "Trials per run");
  app.add_option("--out", g.out, "Write the report to this file instead of stdout");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit the timestamp from the manifest");
  app.add_option("--workers", g.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--config", g.config, "JSON config (or a previous report) for the subcommand");
}

// Builds the parser with every option bound into `s`; parsing only writes
// options that were given, so values loaded beforehand act as defaults.
void build(CLI::App& app, Globals& g, AllSettings& s) {
  app.require_subcommand(1);
  app.fallthrough();
  add_globals(app, g);

  auto* spin = app.add_subcommand("spin-correlation", "Analytic quantum and subquantum correlations");
  spin->add_option("--phi", s.spin.phi, "Angle between the axes, e.g. 60deg (repeatable)");
  spin->add_option("--sweep", s.spin.sweep, "start:stop:step<deg|rad>, e.g. 0:180:5deg");
  spin->add_option("--data", s.spin.data, "Write a two-column (phi, C) data file");

  auto* mc = app.add_subcommand("mc-run", "Monte Carlo run of the spin model");
  mc->add_option("--phi", s.mc.phi, "Angle between the axes");
  mc->add_option("--description", s.mc.description, "alice, bob or both");
  mc->add_option("--records", s.mc.records, "Write per-trial CSV records");

  auto* ball = app.add_subcommand("ball-protocol", "Colored-ball protocol stages");
  ball->add_option("--stage", s.ball.stage, "Stage 1, 2 or 3");
  ball->add_option("--alice-filter", s.ball.alice_filter, "a or c");
  ball->add_option("--bob-filter", s.ball.bob_filter, "b or c");
  ball->add_flag("--all-stages", s.ball.all_stages, "Run stages 1-3 and the inequality check");
  ball->add_flag("--analytic", s.ball.analytic, "Exact probabilities only");
  ball->add_option("--p-stage1", s.ball.p_stage1, "Correlated-row probability, stage 1");
  ball->add_option("--p-stage23", s.ball.p_stage23, "Correlated-row probability, stages 2-3");
  ball->add_option("--mismatch", s.ball.mismatch, "Per-observer filter mismatch probability");
  ball->add_option("--records", s.ball.records, "Write per-trial CSV records");

  auto* cause = app.add_subcommand("common-cause", "Common-cause condition report");
  cause->add_option("--builtin", s.cause.builtin, "spin or ball")
      ->check(CLI::IsMember({"spin", "ball"}));
  cause->add_option("--model-file", s.cause.model_file, "JSON model file");
  cause->add_option("--phi", s.cause.phi, "Angle for the builtin spin model");
  cause->add_option("--stage", s.cause.stage, "Stage for the builtin ball model");
  cause->add_option("--tolerance", s.cause.tolerance, "Equality tolerance");

  auto* chsh = app.add_subcommand("chsh", "CHSH combination (derived demonstration)");
  chsh->add_option("--a", s.chsh.a, "Alice's first axis");
  chsh->add_option("--a-prime", s.chsh.a_prime, "Alice's second axis");
  chsh->add_option("--b", s.chsh.b, "Bob's first axis");
  chsh->add_option("--b-prime", s.chsh.b_prime, "Bob's second axis");
  chsh->add_option("--mode", s.chsh.mode, "analytic, empirical or both");

  for (CLI::App* sub : {spin, mc, ball, cause, chsh}) {
    sub->add_option("--seed", g.seed, "RNG seed (u64)");
    sub->add_option("--trials", g.trials, "Trials per run");
  }
}

void apply_config(const std::string& subcommand, const json& config, AllSettings& s) {
  if (subcommand == "spin-correlation") apply_settings(config, s.spin);
  else if (subcommand == "mc-run") apply_settings(config, s.mc);
  else if (subcommand == "ball-protocol") apply_settings(config, s.ball);
  else if (subcommand == "common-cause") apply_settings(config, s.cause);
  else if (subcommand == "chsh") apply_settings(config, s.chsh);
}

template <class Settings>
void apply_globals(const Globals& g, Settings& s) {
  if constexpr (requires { s.seed; }) {
    if (g.seed) s.seed = *g.seed;
  }
  if constexpr (requires { s.trials; }) {
    if (g.trials) s.trials = *g.trials;
  }
}

RunResult dispatch(const std::string& subcommand, const Globals& g, AllSettings& s,
                   const RunContext& ctx) {
  if (subcommand == "spin-correlation") return run_spin_correlation(s.spin, ctx);
  if (subcommand == "mc-run") {
    apply_globals(g, s.mc);
    return run_mc(s.mc, ctx);
  }
  if (subcommand == "ball-protocol") {
    apply_globals(g, s.ball);
    return run_ball_protocol(s.ball, ctx);
  }
  if (subcommand == "common-cause") return run_common_cause(s.cause, ctx);
  apply_globals(g, s.chsh);
  return run_chsh(s.chsh, ctx);
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  AllSettings settings;
  CLI::App app{"Local-contextual hidden-variable simulations of the EPR-Bohm experiment"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  build(app, g, settings);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    const std::string subcommand = app.get_subcommands().front()->get_name();
    if (!g.config.empty()) {
      // defaults < config < flags: reload the config, then parse again so
      // explicitly given flags land on top of it.
      const json config = load_config(g.config, subcommand);
      Globals fresh_globals;
      AllSettings fresh;
      apply_config(subcommand, config, fresh);
      g = fresh_globals;
      settings = fresh;
      CLI::App again{"bellsim"};
      build(again, g, settings);
      again.parse(argc, argv);
    }

    RunContext ctx;
    ctx.workers = g.workers;
    ctx.timestamp = !g.no_timestamp;
    ctx.out = g.out;
    const RunResult result = dispatch(subcommand, g, settings, ctx);

    const std::string body = g.format == "json" ? result.report.dump(2) + "\n" : result.text;
    if (g.out.empty()) {
      std::cout << body;
    } else {
      std::ofstream f(g.out);
      if (!f) throw UsageError("cannot open '" + g.out + "' for writing");
      f << body;
    }
    return result.passed ? kExitPass : kExitCheckFailed;
  } catch (const balls::EmptyReportError& e) {
    std::cerr << "error: empty report: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
