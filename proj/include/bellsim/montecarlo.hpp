// Seeded Monte Carlo engine for the spin model. Hidden variables are drawn
// with equal weights on the anchoring observer's axis, that observer's
// outcome follows with certainty, and the partner's outcome is sampled from
// the conditional outcome probability.

#ifndef BELLSIM_MONTECARLO_HPP
#define BELLSIM_MONTECARLO_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "bellsim/model.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct ExperimentConfig {
  Direction axis1{0.0};
  Direction axis2{0.0};
  std::uint64_t trials = 1;
  Description description = Description::alice;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream_id = 0;

  /// Throws std::invalid_argument unless 1 <= trials <= kMaxTrialsPerStream.
  void validate() const;
  RngStream stream() const noexcept { return {seed, stream_id}; }
};

struct TrialRecord {
  SpinValue lambda_sign = SpinValue::up();
  SpinValue outcome1 = SpinValue::up();
  SpinValue outcome2 = SpinValue::down();
};

/// 0 for +1, 1 for -1.
constexpr int spin_index(SpinValue s) noexcept { return s.value() == 1 ? 0 : 1; }

struct OutcomeHistogram {
  /// cells[outcome1][outcome2], indexed by spin_index.
  std::array<std::array<std::uint64_t, 2>, 2> cells{};
  /// by_lambda[lambda_sign][outcome1][outcome2]
  std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2> by_lambda{};

  void add(const TrialRecord& r) noexcept;
  std::uint64_t total() const noexcept;
  OutcomeHistogram& operator+=(const OutcomeHistogram& other) noexcept;
  friend bool operator==(const OutcomeHistogram&, const OutcomeHistogram&) = default;
};

struct EmpiricalStats {
  std::uint64_t trials = 0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double pair_mean = 0.0;
  double covariance = 0.0;
  OutcomeHistogram histogram;

  /// sqrt((1 - pair_mean^2) / trials)
  double standard_error() const noexcept;

  friend bool operator==(const EmpiricalStats&, const EmpiricalStats&) = default;
};

EmpiricalStats stats_from_histogram(const OutcomeHistogram& h);

HiddenVariable sample_hidden_variable(const Direction& axis, TrialRng& rng) noexcept;

TrialRecord simulate_trial(const ExperimentConfig& config, TrialRng& rng);

/// The trial drawn from the counter-keyed stream at `trial`.
TrialRecord simulate_trial(const ExperimentConfig& config, std::uint64_t trial);

EmpiricalStats run_experiment(const ExperimentConfig& config, unsigned workers = 1);

std::vector<TrialRecord> simulate_records(const ExperimentConfig& config,
                                          unsigned workers = 1);

/// Acceptance band for an empirical covariance around `target` after
/// `trials` trials: sigmas standard errors of the pair mean plus the bound
/// on the product of two marginals each within `sigmas` standard errors.
double covariance_tolerance(double target, std::uint64_t trials, double sigmas = 3.0);

struct DescriptionComparison {
  double target = 0.0;
  EmpiricalStats alice;
  EmpiricalStats bob;
  double discrepancy = 0.0;
  double single_tolerance = 0.0;
  double combined_tolerance = 0.0;
  bool alice_matches = false;
  bool bob_matches = false;
  bool descriptions_agree = false;

  bool passes() const noexcept { return alice_matches && bob_matches && descriptions_agree; }
};

/// Runs the same setup under both descriptions on independent streams
/// (stream ids 0 and 1).
DescriptionComparison description_equivalence(const Direction& axis1,
                                              const Direction& axis2,
                                              std::uint64_t trials, std::uint64_t seed,
                                              unsigned workers = 1);

enum class ChshMode { analytic, empirical };

struct ChshAngles {
  Direction a{0.0};
  Direction a_prime{kPi / 2};
  Direction b{kPi / 4};
  Direction b_prime{3 * kPi / 4};
};

inline constexpr double kLocalBound = 2.0;

struct ChshResult {
  ChshMode mode = ChshMode::analytic;
  /// E(a,b), E(a,b'), E(a',b), E(a',b'), each from its own context.
  std::array<double, 4> terms{};
  double value = 0.0;
  std::uint64_t trials_per_context = 0;
  double standard_error = 0.0;

  bool exceeds_local_bound() const noexcept;
};

/// S = E(a,b) - E(a,b') + E(a',b) + E(a',b'). Empirical mode runs the four
/// contexts on stream ids 0..3 with hidden variables anchored on Alice's
/// axis of each context.
ChshResult chsh_value(const ChshAngles& angles, ChshMode mode, std::uint64_t trials = 0,
                      std::uint64_t seed = kDefaultSeed, unsigned workers = 1);

}  // namespace bellsim

#endif  // BELLSIM_MONTECARLO_HPP
