// Common-cause pattern checker for two binary effects x, y and a binary
// cause z:
//
//   (1) Pr(x|z) > Pr(x|~z)            (2) Pr(y|z) > Pr(y|~z)
//   (3) Pr(y|z&x) = Pr(y|z&~x)        (4) Pr(y|~z&x) = Pr(y|~z&~x)
//   (5) Pr(x&y|z) = Pr(x|z)Pr(y|z)    (6) Pr(x&y|~z) = Pr(x|~z)Pr(y|~z)
//
// A screening-off sub-check whose conditioning event has (near) zero
// probability is reported as vacuous and counts as holding.

#ifndef BELLSIM_COMMON_CAUSE_HPP
#define BELLSIM_COMMON_CAUSE_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "bellsim/model.hpp"

namespace bellsim {

/// table[x][y]; index 0 means the event occurs, 1 means it is absent.
using JointTable = std::array<std::array<double, 2>, 2>;

inline constexpr int kOccurs = 0;
inline constexpr int kAbsent = 1;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when p_z leaves one of the conditioning events with zero mass.
class ConditioningUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct BinaryEventModel {
  double p_z = 0.5;
  JointTable given_z{};
  JointTable given_not_z{};

  /// Throws ModelError naming the offending table or field.
  void validate(double tolerance = 1e-9) const;

  const JointTable& table(bool z) const noexcept { return z ? given_z : given_not_z; }

  double prob_x(bool z) const noexcept;
  double prob_y(bool z) const noexcept;
  double prob_xy(bool z) const noexcept;

  /// Marginals by total probability over z.
  double unconditional_x() const noexcept;
  double unconditional_y() const noexcept;
  double unconditional_xy() const noexcept;

  /// The same model with the y event replaced by its negation.
  BinaryEventModel with_y_reversed() const noexcept;
};

/// Builds a model from joint counts indexed [z][x][y] (index 0 = occurs).
BinaryEventModel model_from_counts(
    const std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2>& counts);

struct CheckOptions {
  /// Equality tolerance and strict-inequality margin.
  double tolerance = 1e-9;
  /// Conditioning events below this probability make a sub-check vacuous.
  double vacuous_below = 1e-9;
};

/// Tolerance for models estimated from n Monte Carlo trials: 4/sqrt(n).
double statistical_tolerance(std::uint64_t trials);

struct ConditionResult {
  std::string name;
  bool holds = false;
  bool vacuous = false;
  double lhs = 0.0;
  double rhs = 0.0;
  /// |lhs - rhs| for equalities, lhs - rhs for inequalities.
  double margin = 0.0;
};

struct ConditionPair {
  ConditionResult first;
  ConditionResult second;

  bool both() const noexcept { return first.holds && second.holds; }
};

ConditionPair check_cause_relevance(const BinaryEventModel& model,
                                    const CheckOptions& options = {});
ConditionPair check_screening_off(const BinaryEventModel& model,
                                  const CheckOptions& options = {});
ConditionPair check_factorization(const BinaryEventModel& model,
                                  const CheckOptions& options = {});

struct CommonCauseReport {
  ConditionPair relevance;   // (1), (2)
  ConditionPair screening;   // (3), (4)
  ConditionPair factorization;  // (5), (6)
  /// (1), (2) with the y event negated. For anticorrelated effects only one
  /// orientation of y can satisfy the strict inequality.
  ConditionPair relevance_reversed;

  double unconditional_xy = 0.0;
  double unconditional_x = 0.0;
  double unconditional_y = 0.0;
  /// Pr(x&y) - Pr(x)Pr(y)
  double unconditional_correlation = 0.0;
  bool correlated = false;

  /// (3)-(6) hold and there is an unconditional correlation to explain.
  bool certified = false;
};

CommonCauseReport full_report(const BinaryEventModel& model,
                              const CheckOptions& options = {});

/// Spin model with z = lambda^{axis_a}_{+-}, not-z = lambda^{axis_a}_{-+},
/// x = (S_a^(1) = x_outcome), y = (S_b^(2) = y_outcome).
BinaryEventModel spin_event_model(const Direction& axis_a, const Direction& axis_b,
                                  SpinValue x_outcome = SpinValue::up(),
                                  SpinValue y_outcome = SpinValue::up());

}  // namespace bellsim

#endif  // BELLSIM_COMMON_CAUSE_HPP
