// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are fixed; seeds are pinned.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bellsim/ball_protocol.hpp"
#include "bellsim/common_cause.hpp"
#include "bellsim/model.hpp"
#include "bellsim/montecarlo.hpp"
#include "bellsim/report.hpp"

namespace {

using namespace bellsim;
namespace bb = bellsim::balls;

constexpr std::uint64_t kN = 1000000;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (passed) detail << "failed: ";
      else detail << "; ";
      detail << what;
      passed = false;
    }
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<std::pair<Direction, Direction>> random_pairs(std::uint64_t seed, int count) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<std::pair<Direction, Direction>> out;
  for (int i = 0; i < count; ++i) out.emplace_back(Direction(angle(gen)), Direction(angle(gen)));
  return out;
}

// -cos of the angle between two axes, from the explicit unit vectors.
double singlet_oracle(const Direction& a, const Direction& b) {
  const auto u = a.unit_vector();
  const auto v = b.unit_vector();
  return -(u[0] * v[0] + u[1] * v[1] + u[2] * v[2]);
}

void ac1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& [a, b] : random_pairs(1, 1000)) {
    for (Description d : {Description::alice, Description::bob}) {
      worst = std::max(worst, std::fabs(quantum_correlation(a, b, d) - singlet_oracle(a, b)));
    }
  }
  o.require(worst <= 1e-12, "analytic deviation " + num(worst));

  int outside = 0;
  double worst_sigma = 0.0;
  const auto pairs = random_pairs(2, 20);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ExperimentConfig c{pairs[i].first, pairs[i].second, kN, Description::alice, kSeed, i};
    const EmpiricalStats s = run_experiment(c);
    const double target = singlet_oracle(pairs[i].first, pairs[i].second);
    const double err = std::fabs(s.covariance - target);
    const double se = std::sqrt((1.0 - target * target) / static_cast<double>(kN));
    worst_sigma = std::max(worst_sigma, se > 0 ? err / se : 0.0);
    if (err > covariance_tolerance(target, kN, 3.0)) ++outside;
  }
  o.require(outside == 0, std::to_string(outside) + " of 20 Monte Carlo pairs outside 3 SE");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 30.0, "took " + num(secs) + " s");
  o.detail << (o.passed ? "" : " | ") << "analytic max dev " << num(worst)
           << ", MC max |dev|/SE " << num(worst_sigma) << ", " << num(secs) << " s";
}

void ac2(Outcome& o) {
  double worst = 0.0;
  for (const auto& [a, b] : random_pairs(3, 1000)) {
    for (SpinValue j : kSpinValues) {
      worst = std::max(worst, std::fabs(subquantum_correlation(HiddenVariable{a, j}, a, b)));
      worst = std::max(worst, std::fabs(subquantum_correlation(HiddenVariable{b, j}, a, b)));
    }
  }
  o.require(worst <= 1e-12, "max |C_lambda| " + num(worst));
  o.detail << (o.passed ? "" : " | ") << "max |C_lambda| " << num(worst);
}

void ac3(Outcome& o) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uint64_t same_sign = 0;
  std::uint64_t total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Direction axis(angle(gen));
    for (Description d : {Description::alice, Description::bob}) {
      const EmpiricalStats s = run_experiment({axis, axis, 100000, d, seed, 0});
      same_sign += s.histogram.cells[0][0] + s.histogram.cells[1][1];
      total += s.trials;
      o.require(s.pair_mean == -1.0, "pair mean not -1 at seed " + std::to_string(seed));
    }
  }
  o.require(same_sign == 0, std::to_string(same_sign) + " same-sign trials");
  bool exact = true;
  for (int i = 0; i < 1000; ++i) {
    const Direction axis(angle(gen));
    for (SpinValue j : kSpinValues) {
      for (SpinValue r : kSpinValues) {
        exact = exact && joint_outcome_prob(HiddenVariable{axis, j}, axis, axis, r, r) == 0.0;
      }
    }
  }
  o.require(exact, "analytic same-sign probability not exactly 0");
  o.detail << (o.passed ? "" : " | ") << total << " trials over 10 seeds, " << same_sign
           << " same-sign";
}

void ac4(Outcome& o) {
  const std::array<double, 5> phis{0.0, kPi / 6, kPi / 4, 2 * kPi / 3, 3.0};
  double worst = 0.0;
  for (double phi : phis) {
    const DescriptionComparison c =
        description_equivalence(Direction(0.0), Direction(phi), kN, kSeed);
    o.require(c.alice_matches, "alice off at phi " + num(phi));
    o.require(c.bob_matches, "bob off at phi " + num(phi));
    o.require(c.descriptions_agree, "descriptions disagree at phi " + num(phi));
    worst = std::max(worst, c.discrepancy / c.combined_tolerance);
  }
  o.detail << (o.passed ? "" : " | ") << "max discrepancy/tolerance " << num(worst);
}

void ac5(Outcome& o) {
  const CheckOptions opts{1e-9, 1e-9};
  int spin_fail = 0;
  for (const auto& [a, b] : random_pairs(5, 200)) {
    const BinaryEventModel m = spin_event_model(a, b);
    if (!check_screening_off(m, opts).both() || !check_factorization(m, opts).both()) ++spin_fail;
  }
  o.require(spin_fail == 0, std::to_string(spin_fail) + " spin models fail");

  std::vector<bb::ProtocolParameters> variants{bb::ProtocolParameters{}};
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    bb::ProtocolParameters p;
    p.p_stage1 = u(gen);
    p.p_stage23 = u(gen);
    variants.push_back(p);
  }
  int ball_fail = 0;
  for (const auto& p : variants) {
    for (int stage = 1; stage <= 3; ++stage) {
      bb::StageConfig c = bb::default_stage_config(stage);
      c.params = p;
      const BinaryEventModel m = bb::common_cause_model(bb::analytic_stage(c));
      if (!check_screening_off(m, opts).both() || !check_factorization(m, opts).both()) {
        ++ball_fail;
      }
    }
  }
  o.require(ball_fail == 0, std::to_string(ball_fail) + " ball models fail");
  o.detail << (o.passed ? "" : " | ") << "200 spin models, " << variants.size()
           << " ball parameter sets x 3 stages";
}

std::array<bb::AggregateReport, 3> empirical_trilogy() {
  std::array<bb::AggregateReport, 3> out;
  for (int stage = 1; stage <= 3; ++stage) {
    bb::StageConfig c = bb::default_stage_config(stage);
    c.trials = kN;
    c.seed = kSeed;
    c.stream_id = static_cast<std::uint64_t>(stage - 1);
    out[stage - 1] = bb::run_stage(c);
  }
  return out;
}

void ac6(Outcome& o, const std::array<bb::AggregateReport, 3>& reps) {
  const double tol = 4.0 / std::sqrt(static_cast<double>(kN));
  const std::array<double, 4> table2{0.075, 0.425, 0.425, 0.075};
  const std::array<double, 4> table_a2{0.02, 0.48, 0.48, 0.02};
  double worst = 0.0;
  for (int stage = 1; stage <= 3; ++stage) {
    const auto& f = reps[stage - 1].frequencies;
    const auto& expect = stage == 1 ? table2 : table_a2;
    const std::array<double, 4> got{f[0][0], f[0][1], f[1][0], f[1][1]};
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::fabs(got[i] - expect[i]));
  }
  const double corr = reps[0].moments.correlation;
  o.require(worst <= tol, "frequency deviation " + num(worst));
  o.require(std::fabs(corr + 0.7) <= tol, "stage 1 correlation " + num(corr));
  o.detail << (o.passed ? "" : " | ") << "max freq dev " << num(worst) << " (tol " << num(tol)
           << "), stage 1 correlation " << num(corr);
}

void ac7(Outcome& o, const std::array<bb::AggregateReport, 3>& reps) {
  double worst_emp = 0.0;
  for (int stage = 1; stage <= 3; ++stage) {
    const bb::AggregateReport an = bb::analytic_stage(bb::default_stage_config(stage));
    for (bb::AlgorithmId id : bb::stage_algorithms(stage)) {
      o.require(bb::conditional_correlation(an, id) == 0.0,
                "analytic C_" + bb::to_string(id) + " nonzero");
    }
    for (const bb::AlgorithmBreakdown& alg : reps[stage - 1].algorithms) {
      const double v = std::fabs(bb::conditional_correlation(reps[stage - 1], alg.id));
      worst_emp = std::max(worst_emp, v);
      o.require(v <= statistical_tolerance(alg.registered),
                "empirical C_" + bb::to_string(alg.id) + " = " + num(v));
    }
  }
  o.detail << (o.passed ? "" : " | ") << "analytic 0 for all six algorithms, empirical max "
           << num(worst_emp);
}

void ac8(Outcome& o, const std::array<bb::AggregateReport, 3>& reps) {
  std::array<bb::AggregateReport, 3> analytic;
  for (int stage = 1; stage <= 3; ++stage) {
    analytic[stage - 1] = bb::analytic_stage(bb::default_stage_config(stage));
  }
  const bb::BellInequalityReport an = bb::bell_inequality_check(analytic);
  o.require(std::fabs(an.lhs - 0.075) <= 1e-12, "analytic LHS " + num(an.lhs));
  o.require(std::fabs(an.rhs - 0.04) <= 1e-12, "analytic RHS " + num(an.rhs));
  o.require(an.violated, "analytic inequality not violated");

  const bb::BellInequalityReport em = bb::bell_inequality_check(reps);
  o.require(std::fabs(em.lhs - 0.075) <= 0.002, "empirical LHS " + num(em.lhs));
  o.require(std::fabs(em.rhs - 0.04) <= 0.002, "empirical RHS " + num(em.rhs));
  o.require(em.violated, "empirical inequality not violated");

  double gap = 0.0;
  for (int stage = 1; stage <= 3; ++stage) {
    for (SpinValue a : kSpinValues) {
      for (SpinValue b : kSpinValues) {
        const bb::ContextualDecomposition d = bb::contextual_decomposition(stage, a, b);
        gap = std::max(gap, std::fabs(d.composed - d.direct));
      }
    }
  }
  const double d1 = bb::contextual_decomposition(1, SpinValue::up(), SpinValue::up()).composed;
  const double d2 = bb::contextual_decomposition(2, SpinValue::up(), SpinValue::up()).composed;
  o.require(gap <= 1e-12, "decomposition gap " + num(gap));
  o.require(std::fabs(d1 - 0.075) <= 1e-12 && std::fabs(d2 - 0.02) <= 1e-12,
            "decomposition values " + num(d1) + ", " + num(d2));
  o.detail << (o.passed ? "" : " | ") << "analytic " << num(an.lhs) << " > " << num(an.rhs)
           << ", empirical " << num(em.lhs) << " > " << num(em.rhs) << ", decomposition gap "
           << num(gap);
}

void ac9(Outcome& o) {
  const ChshAngles angles{Direction(0.0), Direction(kPi / 2), Direction(kPi / 4),
                          Direction(3 * kPi / 4)};
  const ChshResult an = chsh_value(angles, ChshMode::analytic);
  const double target = 2.0 * std::sqrt(2.0);
  o.require(std::fabs(std::fabs(an.value) - target) <= 1e-12, "analytic |S| " + num(an.value));
  const ChshResult em = chsh_value(angles, ChshMode::empirical, kN, kSeed);
  o.require(std::fabs(std::fabs(em.value) - target) <= 0.02, "empirical |S| " + num(em.value));
  o.detail << (o.passed ? "" : " | ") << "derived demonstration: analytic S " << num(an.value)
           << ", empirical S " << num(em.value);
}

void ac10(Outcome& o) {
  using namespace bellsim::cli;
  const std::vector<std::pair<std::string, std::function<RunResult(const RunContext&)>>> runs{
      {"mc-run",
       [](const RunContext& ctx) {
         McRunSettings s;
         s.trials = 200000;
         s.description = "both";
         return run_mc(s, ctx);
       }},
      {"ball-protocol",
       [](const RunContext& ctx) {
         BallProtocolSettings s;
         s.all_stages = true;
         s.trials = 200000;
         s.mismatch = 0.05;
         return run_ball_protocol(s, ctx);
       }},
      {"chsh",
       [](const RunContext& ctx) {
         ChshSettings s;
         s.trials = 200000;
         return run_chsh(s, ctx);
       }},
  };
  for (const auto& [name, run] : runs) {
    RunContext ctx;
    ctx.timestamp = false;
    ctx.workers = 1;
    const std::string reference = run(ctx).report.dump(2);
    o.require(run(ctx).report.dump(2) == reference, name + " differs on repeat");
    for (unsigned w : {2u, 8u}) {
      ctx.workers = w;
      o.require(run(ctx).report.dump(2) == reference,
                name + " differs with " + std::to_string(w) + " workers");
    }
  }
  o.detail << (o.passed ? "" : " | ") << "mc-run, ball-protocol, chsh identical for 1/1/2/8 workers";
}

}  // namespace

int main() {
  const auto trilogy = empirical_trilogy();
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"AC1 quantum correlation -cos(phi), analytic and Monte Carlo", ac1},
      {"AC2 subquantum correlation vanishes", ac2},
      {"AC3 equal axes give perfect anticorrelation", ac3},
      {"AC4 Alice and Bob descriptions agree", ac4},
      {"AC5 common-cause screening-off and factorization", ac5},
      {"AC6 ball protocol joint frequency tables",
       [&trilogy](Outcome& o) { ac6(o, trilogy); }},
      {"AC7 conditional correlations vanish", [&trilogy](Outcome& o) { ac7(o, trilogy); }},
      {"AC8 three-stage inequality and contextual decomposition",
       [&trilogy](Outcome& o) { ac8(o, trilogy); }},
      {"AC9 CHSH value 2*sqrt(2)", ac9},
      {"AC10 byte-identical output across repeats and workers", ac10},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s -- %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.str().c_str());
    failures += o.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
