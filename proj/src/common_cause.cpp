#include "bellsim/common_cause.hpp"

#include <cmath>

namespace bellsim {

namespace {

void validate_table(const JointTable& t, const char* name, double tolerance) {
  double sum = 0.0;
  for (const auto& row : t) {
    for (double p : row) {
      if (!std::isfinite(p) || p < -tolerance || p > 1.0 + tolerance) {
        throw ModelError(std::string(name) + ": entry outside [0, 1]");
      }
      sum += p;
    }
  }
  if (std::fabs(sum - 1.0) > tolerance) {
    throw ModelError(std::string(name) + ": entries sum to " + std::to_string(sum) +
                     ", expected 1");
  }
}

ConditionResult inequality(std::string name, double lhs, double rhs, double tolerance) {
  return ConditionResult{std::move(name), lhs - rhs > tolerance, false, lhs, rhs,
                         lhs - rhs};
}

ConditionResult equality(std::string name, double lhs, double rhs, double tolerance) {
  const double margin = std::fabs(lhs - rhs);
  return ConditionResult{std::move(name), margin <= tolerance, false, lhs, rhs, margin};
}

void require_nondegenerate(const BinaryEventModel& m) {
  if (!(m.p_z > 0.0 && m.p_z < 1.0)) {
    throw ConditioningUndefined("p_z = " + std::to_string(m.p_z) +
                                " leaves z or not-z with zero probability");
  }
}

// Pr(y | z-branch & x) vs Pr(y | z-branch & ~x)
ConditionResult screening_for(std::string name, const JointTable& t,
                              const CheckOptions& options) {
  const double px = t[kOccurs][kOccurs] + t[kOccurs][kAbsent];
  const double pnx = t[kAbsent][kOccurs] + t[kAbsent][kAbsent];
  if (px < options.vacuous_below || pnx < options.vacuous_below) {
    const double lhs = px < options.vacuous_below ? 0.0 : t[kOccurs][kOccurs] / px;
    const double rhs = pnx < options.vacuous_below ? 0.0 : t[kAbsent][kOccurs] / pnx;
    return ConditionResult{std::move(name), true, true, lhs, rhs, 0.0};
  }
  return equality(std::move(name), t[kOccurs][kOccurs] / px, t[kAbsent][kOccurs] / pnx,
                  options.tolerance);
}

}  // namespace

void BinaryEventModel::validate(double tolerance) const {
  if (!std::isfinite(p_z) || p_z < 0.0 || p_z > 1.0) {
    throw ModelError("p_z: must lie in [0, 1]");
  }
  validate_table(given_z, "joint_given_z", tolerance);
  validate_table(given_not_z, "joint_given_not_z", tolerance);
}

double BinaryEventModel::prob_x(bool z) const noexcept {
  const auto& t = table(z);
  return t[kOccurs][kOccurs] + t[kOccurs][kAbsent];
}

double BinaryEventModel::prob_y(bool z) const noexcept {
  const auto& t = table(z);
  return t[kOccurs][kOccurs] + t[kAbsent][kOccurs];
}

double BinaryEventModel::prob_xy(bool z) const noexcept { return table(z)[kOccurs][kOccurs]; }

double BinaryEventModel::unconditional_x() const noexcept {
  return p_z * prob_x(true) + (1.0 - p_z) * prob_x(false);
}

double BinaryEventModel::unconditional_y() const noexcept {
  return p_z * prob_y(true) + (1.0 - p_z) * prob_y(false);
}

double BinaryEventModel::unconditional_xy() const noexcept {
  return p_z * prob_xy(true) + (1.0 - p_z) * prob_xy(false);
}

BinaryEventModel BinaryEventModel::with_y_reversed() const noexcept {
  BinaryEventModel m = *this;
  for (JointTable* t : {&m.given_z, &m.given_not_z}) {
    for (auto& row : *t) std::swap(row[kOccurs], row[kAbsent]);
  }
  return m;
}

BinaryEventModel model_from_counts(
    const std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2>& counts) {
  std::array<std::uint64_t, 2> totals{};
  for (int z = 0; z < 2; ++z) {
    for (const auto& row : counts[z]) totals[z] += row[0] + row[1];
  }
  const std::uint64_t n = totals[0] + totals[1];
  if (n == 0) throw ModelError("counts: no observations");
  BinaryEventModel m;
  m.p_z = static_cast<double>(totals[0]) / static_cast<double>(n);
  for (int z = 0; z < 2; ++z) {
    JointTable& t = z == 0 ? m.given_z : m.given_not_z;
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        t[x][y] = totals[z] == 0 ? 0.25
                                 : static_cast<double>(counts[z][x][y]) /
                                       static_cast<double>(totals[z]);
      }
    }
  }
  return m;
}

double statistical_tolerance(std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("statistical tolerance needs trials >= 1");
  return 4.0 / std::sqrt(static_cast<double>(trials));
}

ConditionPair check_cause_relevance(const BinaryEventModel& model,
                                    const CheckOptions& options) {
  require_nondegenerate(model);
  return {inequality("Pr(x|z) > Pr(x|~z)", model.prob_x(true), model.prob_x(false),
                     options.tolerance),
          inequality("Pr(y|z) > Pr(y|~z)", model.prob_y(true), model.prob_y(false),
                     options.tolerance)};
}

ConditionPair check_screening_off(const BinaryEventModel& model,
                                  const CheckOptions& options) {
  return {screening_for("Pr(y|z&x) = Pr(y|z&~x)", model.given_z, options),
          screening_for("Pr(y|~z&x) = Pr(y|~z&~x)", model.given_not_z, options)};
}

ConditionPair check_factorization(const BinaryEventModel& model,
                                  const CheckOptions& options) {
  return {equality("Pr(x&y|z) = Pr(x|z)Pr(y|z)", model.prob_xy(true),
                   model.prob_x(true) * model.prob_y(true), options.tolerance),
          equality("Pr(x&y|~z) = Pr(x|~z)Pr(y|~z)", model.prob_xy(false),
                   model.prob_x(false) * model.prob_y(false), options.tolerance)};
}

CommonCauseReport full_report(const BinaryEventModel& model, const CheckOptions& options) {
  CommonCauseReport r;
  r.relevance = check_cause_relevance(model, options);
  r.relevance_reversed = check_cause_relevance(model.with_y_reversed(), options);
  r.relevance_reversed.first.name = "Pr(x|z) > Pr(x|~z)";
  r.relevance_reversed.second.name = "Pr(~y|z) > Pr(~y|~z)";
  r.screening = check_screening_off(model, options);
  r.factorization = check_factorization(model, options);

  r.unconditional_xy = model.unconditional_xy();
  r.unconditional_x = model.unconditional_x();
  r.unconditional_y = model.unconditional_y();
  r.unconditional_correlation = r.unconditional_xy - r.unconditional_x * r.unconditional_y;
  r.correlated = std::fabs(r.unconditional_correlation) > options.tolerance;
  r.certified = r.screening.both() && r.factorization.both() && r.correlated;
  return r;
}

BinaryEventModel spin_event_model(const Direction& axis_a, const Direction& axis_b,
                                  SpinValue x_outcome, SpinValue y_outcome) {
  BinaryEventModel m;
  m.p_z = 0.5;
  for (bool z : {true, false}) {
    const HiddenVariable lambda{axis_a, z ? SpinValue::up() : SpinValue::down()};
    JointTable& t = z ? m.given_z : m.given_not_z;
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const SpinValue r = x == kOccurs ? x_outcome : -x_outcome;
        const SpinValue q = y == kOccurs ? y_outcome : -y_outcome;
        t[x][y] = joint_outcome_prob(lambda, axis_a, axis_b, r, q);
      }
    }
  }
  return m;
}

}  // namespace bellsim
