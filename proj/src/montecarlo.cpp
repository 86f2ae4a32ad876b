#include "bellsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bellsim/parallel.hpp"

namespace bellsim {

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (trials > kMaxTrialsPerStream) {
    throw std::invalid_argument("trials must be <= " + std::to_string(kMaxTrialsPerStream));
  }
}

void OutcomeHistogram::add(const TrialRecord& r) noexcept {
  const int a = spin_index(r.outcome1);
  const int b = spin_index(r.outcome2);
  ++cells[a][b];
  ++by_lambda[spin_index(r.lambda_sign)][a][b];
}

std::uint64_t OutcomeHistogram::total() const noexcept {
  return cells[0][0] + cells[0][1] + cells[1][0] + cells[1][1];
}

OutcomeHistogram& OutcomeHistogram::operator+=(const OutcomeHistogram& other) noexcept {
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      cells[a][b] += other.cells[a][b];
      for (int l = 0; l < 2; ++l) by_lambda[l][a][b] += other.by_lambda[l][a][b];
    }
  }
  return *this;
}

double EmpiricalStats::standard_error() const noexcept {
  if (trials == 0) return 0.0;
  return std::sqrt(std::max(0.0, 1.0 - pair_mean * pair_mean) / static_cast<double>(trials));
}

EmpiricalStats stats_from_histogram(const OutcomeHistogram& h) {
  EmpiricalStats s;
  s.histogram = h;
  s.trials = h.total();
  if (s.trials == 0) return s;
  const auto& c = h.cells;
  // Signed integer sums keep the statistics exact up to the final division.
  const auto n = static_cast<double>(s.trials);
  const auto as_i = [](std::uint64_t v) { return static_cast<std::int64_t>(v); };
  const std::int64_t sum1 = as_i(c[0][0] + c[0][1]) - as_i(c[1][0] + c[1][1]);
  const std::int64_t sum2 = as_i(c[0][0] + c[1][0]) - as_i(c[0][1] + c[1][1]);
  const std::int64_t sum12 = as_i(c[0][0] + c[1][1]) - as_i(c[0][1] + c[1][0]);
  s.mean1 = static_cast<double>(sum1) / n;
  s.mean2 = static_cast<double>(sum2) / n;
  s.pair_mean = static_cast<double>(sum12) / n;
  s.covariance = s.pair_mean - s.mean1 * s.mean2;
  return s;
}

HiddenVariable sample_hidden_variable(const Direction& axis, TrialRng& rng) noexcept {
  return HiddenVariable{axis, rng.bernoulli(0.5) ? SpinValue::up() : SpinValue::down()};
}

TrialRecord simulate_trial(const ExperimentConfig& config, TrialRng& rng) {
  if (config.description == Description::alice) {
    const HiddenVariable lambda = sample_hidden_variable(config.axis1, rng);
    const double p_up =
        conditional_outcome_prob(lambda, Particle::second, config.axis2, SpinValue::up());
    return TrialRecord{lambda.first_particle, lambda.first_particle,
                       rng.bernoulli(p_up) ? SpinValue::up() : SpinValue::down()};
  }
  const HiddenVariable lambda = sample_hidden_variable(config.axis2, rng);
  const double p_up =
      conditional_outcome_prob(lambda, Particle::first, config.axis1, SpinValue::up());
  return TrialRecord{lambda.first_particle,
                     rng.bernoulli(p_up) ? SpinValue::up() : SpinValue::down(),
                     lambda.second_particle()};
}

TrialRecord simulate_trial(const ExperimentConfig& config, std::uint64_t trial) {
  TrialRng rng(config.stream(), trial);
  return simulate_trial(config, rng);
}

EmpiricalStats run_experiment(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  const auto h = detail::parallel_accumulate<OutcomeHistogram>(
      config.trials, workers, [&config](std::uint64_t i, OutcomeHistogram& acc) {
        acc.add(simulate_trial(config, i));
      });
  return stats_from_histogram(h);
}

std::vector<TrialRecord> simulate_records(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  std::vector<TrialRecord> records(config.trials);
  struct Nothing {
    Nothing& operator+=(const Nothing&) { return *this; }
  };
  detail::parallel_accumulate<Nothing>(
      config.trials, workers,
      [&config, &records](std::uint64_t i, Nothing&) { records[i] = simulate_trial(config, i); });
  return records;
}

double covariance_tolerance(double target, std::uint64_t trials, double sigmas) {
  const auto n = static_cast<double>(trials);
  return sigmas * std::sqrt(std::max(0.0, 1.0 - target * target) / n) + sigmas * sigmas / n;
}

DescriptionComparison description_equivalence(const Direction& axis1,
                                              const Direction& axis2,
                                              std::uint64_t trials, std::uint64_t seed,
                                              unsigned workers) {
  DescriptionComparison cmp;
  cmp.target = -std::cos(angle_between(axis1, axis2));
  ExperimentConfig cfg{axis1, axis2, trials, Description::alice, seed, 0};
  cmp.alice = run_experiment(cfg, workers);
  cfg.description = Description::bob;
  cfg.stream_id = 1;
  cmp.bob = run_experiment(cfg, workers);

  cmp.discrepancy = std::fabs(cmp.alice.covariance - cmp.bob.covariance);
  cmp.single_tolerance = covariance_tolerance(cmp.target, trials);
  const auto n = static_cast<double>(trials);
  cmp.combined_tolerance =
      3.0 * std::sqrt(2.0 * std::max(0.0, 1.0 - cmp.target * cmp.target) / n) + 2.0 * 9.0 / n;
  cmp.alice_matches = std::fabs(cmp.alice.covariance - cmp.target) <= cmp.single_tolerance;
  cmp.bob_matches = std::fabs(cmp.bob.covariance - cmp.target) <= cmp.single_tolerance;
  cmp.descriptions_agree = cmp.discrepancy <= cmp.combined_tolerance;
  return cmp;
}

bool ChshResult::exceeds_local_bound() const noexcept {
  return std::fabs(value) > kLocalBound;
}

ChshResult chsh_value(const ChshAngles& angles, ChshMode mode, std::uint64_t trials,
                      std::uint64_t seed, unsigned workers) {
  const std::array<std::pair<Direction, Direction>, 4> contexts = {{
      {angles.a, angles.b},
      {angles.a, angles.b_prime},
      {angles.a_prime, angles.b},
      {angles.a_prime, angles.b_prime},
  }};
  ChshResult result;
  result.mode = mode;
  double variance = 0.0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto& [alice_axis, bob_axis] = contexts[i];
    if (mode == ChshMode::analytic) {
      result.terms[i] = quantum_correlation(alice_axis, bob_axis, Description::alice);
    } else {
      const ExperimentConfig cfg{alice_axis, bob_axis, trials, Description::alice, seed, i};
      const EmpiricalStats s = run_experiment(cfg, workers);
      result.terms[i] = s.pair_mean;
      variance += (1.0 - s.pair_mean * s.pair_mean) / static_cast<double>(trials);
    }
  }
  if (mode == ChshMode::empirical) {
    result.trials_per_context = trials;
    result.standard_error = std::sqrt(std::max(0.0, variance));
  }
  const auto& e = result.terms;
  result.value = e[0] - e[1] + e[2] + e[3];
  return result;
}

}  // namespace bellsim
