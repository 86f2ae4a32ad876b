#include "bellsim/ball_protocol.hpp"

#include <cmath>
#include <deque>
#include <utility>

#include "bellsim/parallel.hpp"

namespace bellsim::balls {

namespace {

// RNG lanes keep each actor's draws separate within a trial.
constexpr std::uint32_t kSourceLane = 0;
constexpr std::uint32_t kAliceLane = 1;
constexpr std::uint32_t kBobLane = 2;

int algorithm_index(AlgorithmId id) noexcept {
  switch (id) {
    case AlgorithmId::a1:
    case AlgorithmId::a1_prime:
    case AlgorithmId::a1_double_prime:
      return 0;
    default:
      return 1;
  }
}

void check_probability(double p, const char* name) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

Color alternate_filter(Observer who, Color filter) noexcept {
  const Color shared = Color::cherry;
  const Color own = who == Observer::alice ? Color::amber : Color::blue;
  return filter == shared ? own : shared;
}

// Single-threaded mailbox between two actors of one pipeline.
template <class T>
class Mailbox {
 public:
  void post(T message) { queue_.push_back(std::move(message)); }

  std::optional<T> take() {
    if (queue_.empty()) return std::nullopt;
    T front = std::move(queue_.front());
    queue_.pop_front();
    return front;
  }

 private:
  std::deque<T> queue_;
};

struct Delivery {
  std::uint64_t trial;
  std::array<SignedBall, 2> balls;
};

struct Upload {
  std::uint64_t trial;
  Observer from;
  Detection detection;
};

struct StageTally {
  std::uint64_t alice_passages = 0;
  std::uint64_t bob_passages = 0;
  std::uint64_t alice_registered = 0;
  std::uint64_t bob_registered = 0;
  std::array<SignCounts, 2> by_algorithm{};

  StageTally& operator+=(const StageTally& o) noexcept {
    alice_passages += o.alice_passages;
    bob_passages += o.bob_passages;
    alice_registered += o.alice_registered;
    bob_registered += o.bob_registered;
    for (int k = 0; k < 2; ++k) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) by_algorithm[k][a][b] += o.by_algorithm[k][a][b];
      }
    }
    return *this;
  }
};

class Source {
 public:
  explicit Source(const StageConfig& config) : config_(config) {}

  AlgorithmId emit(std::uint64_t trial, Mailbox<Delivery>& to_alice,
                   Mailbox<Delivery>& to_bob) const {
    TrialRng rng(config_.stream(), trial, kSourceLane);
    const Emission e = sam_emit(config_.stage, config_.params, rng);
    to_alice.post(Delivery{trial, e.balls.to_alice});
    to_bob.post(Delivery{trial, e.balls.to_bob});
    return e.algorithm;
  }

 private:
  const StageConfig& config_;
};

// One observer's detector. It sees only its own deliveries and writes only
// to the uplink.
class Station {
 public:
  Station(Observer who, Color filter, const StageConfig& config)
      : who_(who), filter_(filter), config_(config) {}

  Mailbox<Delivery>& inbox() noexcept { return inbox_; }

  void drain(Mailbox<Upload>& uplink) {
    while (auto d = inbox_.take()) {
      TrialRng rng(config_.stream(), d->trial, who_ == Observer::alice ? kAliceLane : kBobLane);
      Color tuned = filter_;
      if (config_.params.mismatch_prob > 0.0 && rng.bernoulli(config_.params.mismatch_prob)) {
        tuned = alternate_filter(who_, filter_);
      }
      uplink.post(Upload{d->trial, who_, observer_detect(d->balls, tuned)});
    }
  }

 private:
  Observer who_;
  Color filter_;
  const StageConfig& config_;
  Mailbox<Delivery> inbox_;
};

class RemoteComputer {
 public:
  explicit RemoteComputer(const StageConfig& config) : config_(config) {}

  Mailbox<Upload>& uplink() noexcept { return uplink_; }

  // Collates the two uploads of `trial`. Sam's algorithm log is joined in
  // afterwards for the per-algorithm breakdown.
  BallTrialRecord collate(std::uint64_t trial, AlgorithmId algorithm, StageTally& tally) {
    BallTrialRecord rec;
    rec.trial = trial;
    rec.algorithm = algorithm;
    while (auto u = uplink_.take()) {
      if (u->from == Observer::alice) {
        tally.alice_passages += u->detection.passages;
        tally.alice_registered += u->detection.registered() ? 1 : 0;
        rec.alice = u->detection.recorded;
      } else {
        tally.bob_passages += u->detection.passages;
        tally.bob_registered += u->detection.registered() ? 1 : 0;
        rec.bob = u->detection.recorded;
      }
    }
    rec.registered = rec.alice && rec.bob && rec.alice->color == config_.alice_filter &&
                     rec.bob->color == config_.bob_filter;
    if (rec.registered) {
      ++tally.by_algorithm[algorithm_index(algorithm)][spin_index(rec.alice->sign)]
                         [spin_index(rec.bob->sign)];
    }
    return rec;
  }

 private:
  const StageConfig& config_;
  Mailbox<Upload> uplink_;
};

class Pipeline {
 public:
  explicit Pipeline(const StageConfig& config)
      : source_(config),
        alice_(Observer::alice, config.alice_filter, config),
        bob_(Observer::bob, config.bob_filter, config),
        remote_(config) {}

  BallTrialRecord play(std::uint64_t trial, StageTally& tally) {
    const AlgorithmId algorithm = source_.emit(trial, alice_.inbox(), bob_.inbox());
    alice_.drain(remote_.uplink());
    bob_.drain(remote_.uplink());
    return remote_.collate(trial, algorithm, tally);
  }

 private:
  Source source_;
  Station alice_;
  Station bob_;
  RemoteComputer remote_;
};

SignTable normalized(const SignCounts& c, std::uint64_t total) noexcept {
  SignTable t{};
  if (total == 0) return t;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      t[a][b] = static_cast<double>(c[a][b]) / static_cast<double>(total);
    }
  }
  return t;
}

std::uint64_t sum(const SignCounts& c) noexcept {
  return c[0][0] + c[0][1] + c[1][0] + c[1][1];
}

Moments moments_of(const SignCounts& c) noexcept {
  Moments m;
  const std::uint64_t n = sum(c);
  if (n == 0) return m;
  const auto as_i = [](std::uint64_t v) { return static_cast<std::int64_t>(v); };
  const auto dn = static_cast<double>(n);
  m.alice_mean = static_cast<double>(as_i(c[0][0] + c[0][1]) - as_i(c[1][0] + c[1][1])) / dn;
  m.bob_mean = static_cast<double>(as_i(c[0][0] + c[1][0]) - as_i(c[0][1] + c[1][1])) / dn;
  m.pair_mean = static_cast<double>(as_i(c[0][0] + c[1][1]) - as_i(c[0][1] + c[1][0])) / dn;
  m.correlation = m.pair_mean - m.alice_mean * m.bob_mean;
  return m;
}

AggregateReport report_from_tally(const StageConfig& config, const StageTally& tally) {
  AggregateReport r;
  r.mode = EvaluationMode::empirical;
  r.config = config;
  r.alice_passages = tally.alice_passages;
  r.bob_passages = tally.bob_passages;
  r.alice_registered = tally.alice_registered;
  r.bob_registered = tally.bob_registered;
  for (int k = 0; k < 2; ++k) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) r.counts[a][b] += tally.by_algorithm[k][a][b];
    }
  }
  r.registered_trials = sum(r.counts);
  if (r.registered_trials == 0) {
    throw EmptyReportError("no trial registered by both observers with filters (" +
                           to_string(config.alice_filter) + ", " +
                           to_string(config.bob_filter) + ") at stage " +
                           std::to_string(config.stage));
  }
  r.registered_fraction =
      static_cast<double>(r.registered_trials) / static_cast<double>(config.trials);
  r.frequencies = normalized(r.counts, r.registered_trials);
  r.moments = moments_of(r.counts);
  const auto ids = stage_algorithms(config.stage);
  for (int k = 0; k < 2; ++k) {
    AlgorithmBreakdown& alg = r.algorithms[k];
    alg.id = ids[k];
    alg.counts = tally.by_algorithm[k];
    alg.registered = sum(alg.counts);
    alg.weight = static_cast<double>(alg.registered) / static_cast<double>(r.registered_trials);
    alg.frequencies = normalized(alg.counts, alg.registered);
    alg.moments = moments_of(alg.counts);
  }
  return r;
}

}  // namespace

std::string to_string(Color c) {
  switch (c) {
    case Color::amber:
      return "a";
    case Color::blue:
      return "b";
    case Color::cherry:
      return "c";
  }
  return "?";
}

Color color_from_string(const std::string& code) {
  if (code == "a" || code == "amber") return Color::amber;
  if (code == "b" || code == "blue") return Color::blue;
  if (code == "c" || code == "cherry") return Color::cherry;
  throw std::invalid_argument("unknown color '" + code + "' (expected a, b or c)");
}

std::string to_string(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::a1:
      return "A1";
    case AlgorithmId::a2:
      return "A2";
    case AlgorithmId::a1_prime:
      return "A1'";
    case AlgorithmId::a2_prime:
      return "A2'";
    case AlgorithmId::a1_double_prime:
      return "A1''";
    case AlgorithmId::a2_double_prime:
      return "A2''";
  }
  return "?";
}

AlgorithmId algorithm_from_string(const std::string& name) {
  for (AlgorithmId id : {AlgorithmId::a1, AlgorithmId::a2, AlgorithmId::a1_prime,
                         AlgorithmId::a2_prime, AlgorithmId::a1_double_prime,
                         AlgorithmId::a2_double_prime}) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

int stage_of(AlgorithmId id) noexcept {
  switch (id) {
    case AlgorithmId::a1:
    case AlgorithmId::a2:
      return 1;
    case AlgorithmId::a1_prime:
    case AlgorithmId::a2_prime:
      return 2;
    default:
      return 3;
  }
}

void validate_stage(int stage) {
  if (stage < 1 || stage > 3) {
    throw std::invalid_argument("stage must be 1, 2 or 3, got " + std::to_string(stage));
  }
}

std::array<AlgorithmId, 2> stage_algorithms(int stage) {
  validate_stage(stage);
  switch (stage) {
    case 1:
      return {AlgorithmId::a1, AlgorithmId::a2};
    case 2:
      return {AlgorithmId::a1_prime, AlgorithmId::a2_prime};
    default:
      return {AlgorithmId::a1_double_prime, AlgorithmId::a2_double_prime};
  }
}

StageColors stage_colors(int stage) {
  validate_stage(stage);
  switch (stage) {
    case 1:
      return {Color::amber, Color::blue};
    case 2:
      return {Color::amber, Color::cherry};
    default:
      return {Color::cherry, Color::blue};
  }
}

void ProtocolParameters::validate() const {
  check_probability(p_stage1, "p_stage1");
  check_probability(p_stage23, "p_stage23");
  check_probability(mismatch_prob, "mismatch_prob");
}

double ProtocolParameters::p_for_stage(int stage) const {
  validate_stage(stage);
  return stage == 1 ? p_stage1 : p_stage23;
}

bool Quadruple::satisfies_anticorrelation() const noexcept {
  for (const SignedBall& a : to_alice) {
    for (const SignedBall& b : to_bob) {
      if (a.color == b.color && a.sign == b.sign) return false;
    }
  }
  return true;
}

AlgorithmTable algorithm_table(AlgorithmId id, const ProtocolParameters& params) {
  const int stage = stage_of(id);
  const StageColors colors = stage_colors(stage);
  const double p = params.p_for_stage(stage);
  const SpinValue s = algorithm_index(id) == 0 ? SpinValue::up() : SpinValue::down();

  const auto quad = [&](SpinValue drawn_to_bob) {
    return Quadruple{
        {SignedBall{colors.fixed, s, Observer::alice},
         SignedBall{colors.drawn, -drawn_to_bob, Observer::alice}},
        {SignedBall{colors.drawn, drawn_to_bob, Observer::bob},
         SignedBall{colors.fixed, -s, Observer::bob}}};
  };
  return AlgorithmTable{id, stage, s, p, {AlgorithmRow{quad(s), p}, AlgorithmRow{quad(-s), 1.0 - p}}};
}

Emission sam_emit(int stage, const ProtocolParameters& params, TrialRng& rng) {
  const auto ids = stage_algorithms(stage);
  const AlgorithmId chosen = rng.bernoulli(0.5) ? ids[0] : ids[1];
  const AlgorithmTable table = algorithm_table(chosen, params);
  const bool correlated_row = rng.bernoulli(table.correlated_prob);
  return Emission{chosen, table.rows[correlated_row ? 0 : 1].balls};
}

Detection observer_detect(std::span<const SignedBall, 2> balls, Color filter) {
  Detection d;
  for (const SignedBall& ball : balls) {
    ++d.passages;
    if (ball.color == filter) d.recorded = ball;
  }
  return d;
}

void StageConfig::validate() const {
  validate_stage(stage);
  if (alice_filter != Color::amber && alice_filter != Color::cherry) {
    throw std::invalid_argument("alice_filter must be a or c");
  }
  if (bob_filter != Color::blue && bob_filter != Color::cherry) {
    throw std::invalid_argument("bob_filter must be b or c");
  }
  if (trials < 1 || trials > kMaxTrialsPerStream) {
    throw std::invalid_argument("trials must lie in [1, " + std::to_string(kMaxTrialsPerStream) +
                                "]");
  }
  params.validate();
}

StageConfig default_stage_config(int stage) {
  validate_stage(stage);
  StageConfig c;
  c.stage = stage;
  c.alice_filter = stage == 3 ? Color::cherry : Color::amber;
  c.bob_filter = stage == 2 ? Color::cherry : Color::blue;
  return c;
}

Moments moments_of(const SignTable& f) noexcept {
  Moments m;
  m.alice_mean = (f[0][0] + f[0][1]) - (f[1][0] + f[1][1]);
  m.bob_mean = (f[0][0] + f[1][0]) - (f[0][1] + f[1][1]);
  m.pair_mean = (f[0][0] + f[1][1]) - (f[0][1] + f[1][0]);
  m.correlation = m.pair_mean - m.alice_mean * m.bob_mean;
  return m;
}

AggregateReport run_stage(const StageConfig& config, unsigned workers) {
  config.validate();
  const StageTally tally = detail::parallel_accumulate<StageTally>(
      config.trials, workers, [&config](std::uint64_t i, StageTally& acc) {
        // Actors are cheap; a fresh set per trial keeps workers independent.
        Pipeline pipeline(config);
        pipeline.play(i, acc);
      });
  return report_from_tally(config, tally);
}

std::vector<BallTrialRecord> simulate_stage_records(const StageConfig& config,
                                                    unsigned workers) {
  config.validate();
  std::vector<BallTrialRecord> records(config.trials);
  struct Ignore {
    Ignore& operator+=(const Ignore&) { return *this; }
  };
  detail::parallel_accumulate<Ignore>(config.trials, workers,
                                      [&config, &records](std::uint64_t i, Ignore&) {
                                        Pipeline pipeline(config);
                                        StageTally scratch;
                                        records[i] = pipeline.play(i, scratch);
                                      });
  return records;
}

AggregateReport analytic_stage(const StageConfig& config) {
  config.validate();
  const auto ids = stage_algorithms(config.stage);
  const double m = config.params.mismatch_prob;

  // prob[k][a][b]: joint probability of algorithm k and a kept trial with
  // Alice sign a and Bob sign b.
  std::array<SignTable, 2> prob{};
  for (int k = 0; k < 2; ++k) {
    const AlgorithmTable table = algorithm_table(ids[k], config.params);
    for (const AlgorithmRow& row : table.rows) {
      for (int alice_switch = 0; alice_switch < 2; ++alice_switch) {
        for (int bob_switch = 0; bob_switch < 2; ++bob_switch) {
          const double p_choice =
              (alice_switch ? m : 1.0 - m) * (bob_switch ? m : 1.0 - m);
          const double weight = 0.5 * row.frequency * p_choice;
          if (weight == 0.0) continue;
          const Color alice_tuned = alice_switch
                                        ? alternate_filter(Observer::alice, config.alice_filter)
                                        : config.alice_filter;
          const Color bob_tuned =
              bob_switch ? alternate_filter(Observer::bob, config.bob_filter) : config.bob_filter;
          const Detection da = observer_detect(row.balls.to_alice, alice_tuned);
          const Detection db = observer_detect(row.balls.to_bob, bob_tuned);
          if (da.recorded && db.recorded && da.recorded->color == config.alice_filter &&
              db.recorded->color == config.bob_filter) {
            prob[k][spin_index(da.recorded->sign)][spin_index(db.recorded->sign)] += weight;
          }
        }
      }
    }
  }

  AggregateReport r;
  r.mode = EvaluationMode::analytic;
  r.config = config;
  std::array<double, 2> per_alg{};
  for (int k = 0; k < 2; ++k) {
    per_alg[k] = prob[k][0][0] + prob[k][0][1] + prob[k][1][0] + prob[k][1][1];
  }
  const double kept = per_alg[0] + per_alg[1];
  if (kept <= 0.0) {
    throw EmptyReportError("no trial can be registered by both observers with filters (" +
                           to_string(config.alice_filter) + ", " +
                           to_string(config.bob_filter) + ") at stage " +
                           std::to_string(config.stage));
  }
  r.registered_fraction = kept;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) r.frequencies[a][b] = (prob[0][a][b] + prob[1][a][b]) / kept;
  }
  r.moments = moments_of(r.frequencies);
  for (int k = 0; k < 2; ++k) {
    AlgorithmBreakdown& alg = r.algorithms[k];
    alg.id = ids[k];
    alg.weight = per_alg[k] / kept;
    if (per_alg[k] > 0.0) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) alg.frequencies[a][b] = prob[k][a][b] / per_alg[k];
      }
    }
    alg.moments = moments_of(alg.frequencies);
  }
  return r;
}

double conditional_correlation(const AggregateReport& report, AlgorithmId algorithm) {
  if (stage_of(algorithm) != report.config.stage) {
    throw std::invalid_argument("algorithm " + to_string(algorithm) +
                                " does not belong to stage " +
                                std::to_string(report.config.stage));
  }
  return report.algorithms[algorithm_index(algorithm)].moments.correlation;
}

BellInequalityReport bell_inequality_check(std::span<const AggregateReport, 3> reports) {
  constexpr std::array<std::pair<Color, Color>, 3> expected = {{
      {Color::amber, Color::blue},
      {Color::amber, Color::cherry},
      {Color::cherry, Color::blue},
  }};
  for (int i = 0; i < 3; ++i) {
    const StageConfig& c = reports[i].config;
    if (c.stage != i + 1 || c.alice_filter != expected[i].first ||
        c.bob_filter != expected[i].second) {
      throw std::invalid_argument(
          "inequality needs stages 1, 2, 3 with filters (a,b), (a,c), (c,b); report " +
          std::to_string(i + 1) + " is stage " + std::to_string(c.stage) + " with (" +
          to_string(c.alice_filter) + "," + to_string(c.bob_filter) + ")");
    }
  }
  BellInequalityReport r;
  r.lhs = reports[0].frequencies[0][0];
  r.rhs_terms = {reports[1].frequencies[0][0], reports[2].frequencies[0][0]};
  r.rhs = r.rhs_terms[0] + r.rhs_terms[1];
  r.violated = r.lhs > r.rhs;
  return r;
}

ContextualDecomposition contextual_decomposition(const AggregateReport& report,
                                                 SpinValue alice_sign, SpinValue bob_sign) {
  ContextualDecomposition d;
  d.stage = report.config.stage;
  d.alice_color = report.config.alice_filter;
  d.alice_sign = alice_sign;
  d.bob_color = report.config.bob_filter;
  d.bob_sign = bob_sign;
  const int a = spin_index(alice_sign);
  const int b = spin_index(bob_sign);
  for (int k = 0; k < 2; ++k) {
    const AlgorithmBreakdown& alg = report.algorithms[k];
    d.contexts[k] = ContextTerm{alg.id, alg.frequencies[a][b], alg.weight};
    d.composed += alg.frequencies[a][b] * alg.weight;
  }
  d.direct = report.frequencies[a][b];
  return d;
}

ContextualDecomposition contextual_decomposition(int stage, SpinValue alice_sign,
                                                 SpinValue bob_sign,
                                                 const ProtocolParameters& params) {
  StageConfig config = default_stage_config(stage);
  config.params = params;
  return contextual_decomposition(analytic_stage(config), alice_sign, bob_sign);
}

BinaryEventModel common_cause_model(const AggregateReport& report) {
  BinaryEventModel m;
  m.p_z = report.algorithms[0].weight;
  m.given_z = report.algorithms[0].frequencies;
  m.given_not_z = report.algorithms[1].frequencies;
  return m;
}

}  // namespace bellsim::balls
