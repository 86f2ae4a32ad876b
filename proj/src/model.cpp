#include "bellsim/model.hpp"

#include <cmath>

namespace bellsim {

Direction::Direction(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("direction angle must be finite");
  }
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod of a tiny negative value can round back up to exactly 2*pi.
  if (t >= kTwoPi) t = 0.0;
  theta_ = t;
}

Direction Direction::from_degrees(double degrees) {
  return Direction(degrees * kPi / 180.0);
}

std::array<double, 3> Direction::unit_vector() const noexcept {
  return {0.0, std::sin(theta_), std::cos(theta_)};
}

SpinValue::SpinValue(int value) : value_(value) {
  if (value != 1 && value != -1) {
    throw std::invalid_argument("spin value must be +1 or -1, got " +
                                std::to_string(value));
  }
}

Particle particle_from_index(int index) {
  switch (index) {
    case 1:
      return Particle::first;
    case 2:
      return Particle::second;
    default:
      throw std::invalid_argument("particle index must be 1 or 2, got " +
                                  std::to_string(index));
  }
}

std::string to_string(Description d) { return d == Description::alice ? "alice" : "bob"; }

Description description_from_string(const std::string& name) {
  if (name == "alice") return Description::alice;
  if (name == "bob") return Description::bob;
  throw std::invalid_argument("unknown description '" + name + "'");
}

double SpinVector::norm() const noexcept {
  return std::sqrt(components[0] * components[0] + components[1] * components[1] +
                   components[2] * components[2]);
}

double SpinVector::dot(const std::array<double, 3>& v) const noexcept {
  return components[0] * v[0] + components[1] * v[1] + components[2] * v[2];
}

double angle_between(const Direction& n, const Direction& m) noexcept {
  double d = std::fabs(n.theta() - m.theta());
  if (d > kPi) d = kTwoPi - d;
  return d;
}

double axis_cosine(const Direction& n, const Direction& m) noexcept {
  return std::cos(n.theta() - m.theta());
}

SpinVector spin_vector(const HiddenVariable& lambda, Particle particle) noexcept {
  const double j = lambda.predetermined(particle).value();
  const auto n = lambda.axis.unit_vector();
  return SpinVector{{j * n[0], j * n[1], j * n[2]}};
}

double mean_value(const HiddenVariable& lambda, Particle particle,
                  const Direction& axis) noexcept {
  const int j = lambda.predetermined(particle).value();
  if (axis == lambda.axis) return j;
  return j * axis_cosine(lambda.axis, axis);
}

double conditional_outcome_prob(const HiddenVariable& lambda, Particle particle,
                                const Direction& axis, SpinValue outcome) noexcept {
  return 0.5 * (1.0 + outcome.value() * mean_value(lambda, particle, axis));
}

double joint_outcome_prob(const HiddenVariable& lambda, const Direction& axis1,
                          const Direction& axis2, SpinValue r, SpinValue q) noexcept {
  return conditional_outcome_prob(lambda, Particle::first, axis1, r) *
         conditional_outcome_prob(lambda, Particle::second, axis2, q);
}

double pair_expectation(const HiddenVariable& lambda, const Direction& axis1,
                        const Direction& axis2) noexcept {
  double sum = 0.0;
  for (SpinValue k : kSpinValues) {
    for (SpinValue l : kSpinValues) {
      sum += k.value() * l.value() * joint_outcome_prob(lambda, axis1, axis2, k, l);
    }
  }
  return sum;
}

double subquantum_correlation(const HiddenVariable& lambda, const Direction& axis1,
                              const Direction& axis2) {
  if (!(lambda.axis == axis1) && !(lambda.axis == axis2)) {
    throw ContextError(
        "subquantum correlation requires the hidden variable to be anchored on "
        "one of the measurement axes");
  }
  return pair_expectation(lambda, axis1, axis2) -
         mean_value(lambda, Particle::first, axis1) *
             mean_value(lambda, Particle::second, axis2);
}

double marginal_expectation(const Direction& source_axis, Particle particle,
                            const Direction& measure_axis) noexcept {
  double sum = 0.0;
  for (SpinValue j : kSpinValues) {
    sum += 0.5 * mean_value(HiddenVariable{source_axis, j}, particle, measure_axis);
  }
  return sum;
}

namespace {

const Direction& anchor_axis(const Direction& axis1, const Direction& axis2,
                             Description description) noexcept {
  return description == Description::alice ? axis1 : axis2;
}

}  // namespace

double averaged_pair_expectation(const Direction& axis1, const Direction& axis2,
                                 Description description) noexcept {
  const Direction& anchor = anchor_axis(axis1, axis2, description);
  double sum = 0.0;
  for (SpinValue j : kSpinValues) {
    sum += 0.5 * pair_expectation(HiddenVariable{anchor, j}, axis1, axis2);
  }
  return sum;
}

double quantum_correlation(const Direction& axis1, const Direction& axis2,
                           Description description) noexcept {
  const Direction& anchor = anchor_axis(axis1, axis2, description);
  return averaged_pair_expectation(axis1, axis2, description) -
         marginal_expectation(anchor, Particle::first, axis1) *
             marginal_expectation(anchor, Particle::second, axis2);
}

}  // namespace bellsim
