// Subcommand orchestration behind the bellsim CLI. Each run_* function takes
// fully resolved settings and returns the machine-readable report, a text
// summary, and whether every embedded check passed.

#ifndef BELLSIM_REPORT_HPP
#define BELLSIM_REPORT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellsim/montecarlo.hpp"

namespace bellsim::cli {

inline constexpr const char* kToolName = "bellsim";
inline constexpr const char* kToolVersion = "0.1.0";

/// Bad flags, unreadable or invalid configuration. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "60deg", "1.0471975511965976rad". A unit suffix is required.
double parse_angle(const std::string& text);

struct Sweep {
  std::vector<double> radians;
  /// Angles in the unit the sweep was written in.
  std::vector<double> display;
  std::string unit;
};

/// Parses "start:stop:step<unit>", e.g. "0:180:5deg" (inclusive of stop).
Sweep parse_sweep(const std::string& text);

struct RunContext {
  unsigned workers = 1;
  bool timestamp = true;
  /// Report destination, recorded in the manifest. Empty means stdout.
  std::string out;
};

struct RunResult {
  nlohmann::json report;
  std::string text;
  bool passed = true;
};

struct SpinCorrelationSettings {
  std::vector<std::string> phi;
  std::string sweep;
  /// Two-column (phi, C) data file.
  std::string data;
};

struct McRunSettings {
  std::string phi = "60deg";
  std::uint64_t trials = 1000000;
  std::uint64_t seed = kDefaultSeed;
  /// alice, bob or both
  std::string description = "alice";
  std::string records;
};

struct BallProtocolSettings {
  int stage = 1;
  /// Empty selects the stage's own colors.
  std::string alice_filter;
  std::string bob_filter;
  bool all_stages = false;
  bool analytic = false;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = kDefaultSeed;
  double p_stage1 = 0.15;
  double p_stage23 = 0.04;
  double mismatch = 0.0;
  std::string records;
};

struct CommonCauseSettings {
  /// spin or ball; empty when model_file is used.
  std::string builtin;
  std::string model_file;
  std::string phi = "45deg";
  int stage = 1;
  double tolerance = 1e-9;
};

struct ChshSettings {
  std::string a = "0deg";
  std::string a_prime = "90deg";
  std::string b = "45deg";
  std::string b_prime = "135deg";
  /// analytic, empirical or both
  std::string mode = "both";
  std::uint64_t trials = 1000000;
  std::uint64_t seed = kDefaultSeed;
};

// Settings <-> JSON with keys equal to the long flag names. from_json only
// touches keys that are present, so it layers over defaults.
nlohmann::json settings_json(const SpinCorrelationSettings& s);
nlohmann::json settings_json(const McRunSettings& s);
nlohmann::json settings_json(const BallProtocolSettings& s);
nlohmann::json settings_json(const CommonCauseSettings& s);
nlohmann::json settings_json(const ChshSettings& s);

void apply_settings(const nlohmann::json& j, SpinCorrelationSettings& s);
void apply_settings(const nlohmann::json& j, McRunSettings& s);
void apply_settings(const nlohmann::json& j, BallProtocolSettings& s);
void apply_settings(const nlohmann::json& j, CommonCauseSettings& s);
void apply_settings(const nlohmann::json& j, ChshSettings& s);

/// Extracts the settings object for `subcommand` from a config document,
/// which is either a plain settings object or a previously emitted report
/// carrying a manifest.
nlohmann::json config_for(const nlohmann::json& document, const std::string& subcommand);

RunResult run_spin_correlation(const SpinCorrelationSettings& s, const RunContext& ctx);
RunResult run_mc(const McRunSettings& s, const RunContext& ctx);
RunResult run_ball_protocol(const BallProtocolSettings& s, const RunContext& ctx);
RunResult run_common_cause(const CommonCauseSettings& s, const RunContext& ctx);
RunResult run_chsh(const ChshSettings& s, const RunContext& ctx);

}  // namespace bellsim::cli

#endif  // BELLSIM_REPORT_HPP
