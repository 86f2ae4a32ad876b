// Classical colored-ball analogue of the spin experiment.
//
// A source (Sam) sends, in each trial, one ball of each of the stage's two
// colors to Alice and to Bob. Same-colored balls sent to the two observers
// always carry opposite signs. Which of the stage's two complementary
// executive algorithms runs is chosen with equal chance; the first algorithm
// fixes Alice's first-color sign to + and gives Bob's second-color ball a +
// with probability p, the second algorithm is its sign mirror.
//
//   stage 1: colors (a, b), algorithms A1 / A2,   p = p_stage1  (0.15)
//   stage 2: colors (a, c), algorithms A1' / A2', p = p_stage23 (0.04)
//   stage 3: colors (c, b), algorithms A1''/ A2'', p = p_stage23 (0.04)
//
// Each observer's detector passes every ball but records the sign only of
// the one color it is tuned to. Alice and Bob never exchange anything; they
// only upload their records to a remote computer that tabulates trials in
// which both registered the expected colors.

#ifndef BELLSIM_BALL_PROTOCOL_HPP
#define BELLSIM_BALL_PROTOCOL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellsim/common_cause.hpp"
#include "bellsim/model.hpp"
#include "bellsim/montecarlo.hpp"
#include "bellsim/rng.hpp"

namespace bellsim::balls {

enum class Color { amber, blue, cherry };

/// "a", "b" or "c".
std::string to_string(Color c);
Color color_from_string(const std::string& code);

enum class Observer { alice, bob };

struct SignedBall {
  Color color;
  SpinValue sign;
  Observer addressee;

  friend bool operator==(const SignedBall&, const SignedBall&) = default;
};

enum class AlgorithmId { a1, a2, a1_prime, a2_prime, a1_double_prime, a2_double_prime };

/// "A1", "A2", "A1'", "A2'", "A1''", "A2''"
std::string to_string(AlgorithmId id);
AlgorithmId algorithm_from_string(const std::string& name);

int stage_of(AlgorithmId id) noexcept;

/// The stage's algorithm pair: {first, complement}.
std::array<AlgorithmId, 2> stage_algorithms(int stage);

/// Color whose signs the algorithm fixes, and color whose signs are drawn.
struct StageColors {
  Color fixed;
  Color drawn;
};

StageColors stage_colors(int stage);

void validate_stage(int stage);

struct ProtocolParameters {
  double p_stage1 = 0.15;
  double p_stage23 = 0.04;
  /// Per trial and per observer, probability of tuning the detector to the
  /// observer's other color instead of the configured one.
  double mismatch_prob = 0.0;

  void validate() const;
  double p_for_stage(int stage) const;
};

/// Balls in the order (X_A, Y_A; Y_B, X_B) with X the fixed and Y the drawn
/// color of the stage.
struct Quadruple {
  std::array<SignedBall, 2> to_alice;
  std::array<SignedBall, 2> to_bob;

  /// Same-colored balls to Alice and Bob carry opposite signs.
  bool satisfies_anticorrelation() const noexcept;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

struct AlgorithmRow {
  Quadruple balls;
  double frequency;
};

struct AlgorithmTable {
  AlgorithmId id;
  int stage;
  /// Sign of the fixed color sent to Alice.
  SpinValue fixed_alice_sign;
  /// Probability that Bob's drawn-color ball carries the same sign as
  /// fixed_alice_sign (the first row).
  double correlated_prob;
  std::array<AlgorithmRow, 2> rows;
};

/// The second algorithm of each stage is built by mirroring every sign of
/// the first one while keeping the row frequencies.
AlgorithmTable algorithm_table(AlgorithmId id, const ProtocolParameters& params = {});

struct Emission {
  AlgorithmId algorithm;
  Quadruple balls;
};

Emission sam_emit(int stage, const ProtocolParameters& params, TrialRng& rng);

struct Detection {
  /// Color and sign of the ball matching the filter, if any arrived.
  std::optional<SignedBall> recorded;
  /// Every ball passing through the device, recognised or not.
  std::uint32_t passages = 0;

  bool registered() const noexcept { return recorded.has_value(); }
};

Detection observer_detect(std::span<const SignedBall, 2> balls, Color filter);

struct StageConfig {
  int stage = 1;
  Color alice_filter = Color::amber;
  Color bob_filter = Color::blue;
  std::uint64_t trials = 1;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream_id = 0;
  ProtocolParameters params;

  /// Alice's filter must be a or c, Bob's b or c.
  void validate() const;
  RngStream stream() const noexcept { return {seed, stream_id}; }
};

/// Stage with the filters that pick out the stage's colors: (a, b), (a, c)
/// and (c, b).
StageConfig default_stage_config(int stage);

class EmptyReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frequencies indexed [alice sign][bob sign] by spin_index (0 = +).
using SignTable = std::array<std::array<double, 2>, 2>;
using SignCounts = std::array<std::array<std::uint64_t, 2>, 2>;

struct Moments {
  double alice_mean = 0.0;
  double bob_mean = 0.0;
  double pair_mean = 0.0;
  /// pair_mean - alice_mean * bob_mean
  double correlation = 0.0;
};

Moments moments_of(const SignTable& freq) noexcept;

struct AlgorithmBreakdown {
  AlgorithmId id = AlgorithmId::a1;
  /// Share of registered trials run under this algorithm.
  double weight = 0.0;
  std::uint64_t registered = 0;
  SignCounts counts{};
  /// Frequencies conditional on the algorithm.
  SignTable frequencies{};
  Moments moments;
};

enum class EvaluationMode { analytic, empirical };

struct AggregateReport {
  EvaluationMode mode = EvaluationMode::empirical;
  StageConfig config;

  // Device counters (zero in analytic mode).
  std::uint64_t alice_passages = 0;
  std::uint64_t bob_passages = 0;
  std::uint64_t alice_registered = 0;
  std::uint64_t bob_registered = 0;
  std::uint64_t registered_trials = 0;
  /// Fraction of trials the remote computer keeps.
  double registered_fraction = 0.0;

  SignCounts counts{};
  /// Joint frequencies over kept trials; they sum to 1.
  SignTable frequencies{};
  Moments moments;
  std::array<AlgorithmBreakdown, 2> algorithms;
};

/// Simulates config.trials emissions. Throws EmptyReportError when no trial
/// is registered by both observers.
AggregateReport run_stage(const StageConfig& config, unsigned workers = 1);

/// Exact probabilities for the same configuration (trials and seed unused).
AggregateReport analytic_stage(const StageConfig& config);

struct BallTrialRecord {
  std::uint64_t trial = 0;
  AlgorithmId algorithm = AlgorithmId::a1;
  std::optional<SignedBall> alice;
  std::optional<SignedBall> bob;
  /// Both observers recorded their configured colors.
  bool registered = false;
};

std::vector<BallTrialRecord> simulate_stage_records(const StageConfig& config,
                                                    unsigned workers = 1);

/// <ab> - <a><b> restricted to trials run under `algorithm`. Throws
/// std::invalid_argument if the algorithm belongs to another stage.
double conditional_correlation(const AggregateReport& report, AlgorithmId algorithm);

struct BellInequalityReport {
  /// Pr(a_A+; b_B+)
  double lhs = 0.0;
  /// Pr(a_A+; c_B+), Pr(c_A+; b_B+)
  std::array<double, 2> rhs_terms{};
  double rhs = 0.0;
  bool violated = false;
};

/// Evaluates Pr(a_A+; b_B+) <= Pr(a_A+; c_B+) + Pr(c_A+; b_B+) from reports
/// of stages 1, 2, 3 with filters (a,b), (a,c), (c,b).
BellInequalityReport bell_inequality_check(std::span<const AggregateReport, 3> reports);

struct ContextTerm {
  AlgorithmId algorithm = AlgorithmId::a1;
  /// Pr(event | algorithm)
  double conditional = 0.0;
  /// Pr(algorithm)
  double weight = 0.0;
};

/// Pr(event) composed over the two executive algorithms of a stage, each
/// term evaluated in its own context, against the direct frequency.
struct ContextualDecomposition {
  int stage = 1;
  Color alice_color = Color::amber;
  SpinValue alice_sign = SpinValue::up();
  Color bob_color = Color::blue;
  SpinValue bob_sign = SpinValue::up();
  std::array<ContextTerm, 2> contexts{};
  double composed = 0.0;
  double direct = 0.0;
};

ContextualDecomposition contextual_decomposition(const AggregateReport& report,
                                                 SpinValue alice_sign, SpinValue bob_sign);

/// Same, for the analytic stage with its default filters.
ContextualDecomposition contextual_decomposition(int stage, SpinValue alice_sign,
                                                 SpinValue bob_sign,
                                                 const ProtocolParameters& params = {});

/// Common-cause model with z = the stage's first algorithm, x = Alice
/// records +, y = Bob records +, over registered trials.
BinaryEventModel common_cause_model(const AggregateReport& report);

}  // namespace bellsim::balls

#endif  // BELLSIM_BALL_PROTOCOL_HPP
