// Local-contextual hidden-variable model of the EPR-Bohm spin experiment.
//
// Measurement axes live in the y-z plane and are parameterised by a single
// angle theta (n = sin(theta) y + cos(theta) z). A hidden variable fixes an
// axis together with the predetermined, opposite outcomes of the two
// particles along it. Everything else (projected means, conditional and
// joint outcome probabilities, correlations) is closed-form.
//
// All functions here are pure and thread-safe.

#ifndef BELLSIM_MODEL_HPP
#define BELLSIM_MODEL_HPP

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bellsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tolerance used for identities that hold exactly in real arithmetic.
inline constexpr double kExactTolerance = 1e-12;

/// Raised when a quantity is requested outside the hidden-variable context
/// it is defined in.
class ContextError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A measurement axis in the y-z plane. The stored angle is canonicalised
/// into [0, 2*pi).
class Direction {
 public:
  explicit Direction(double theta);

  static Direction from_degrees(double degrees);

  double theta() const noexcept { return theta_; }

  /// (x, y, z) components; x is always zero.
  std::array<double, 3> unit_vector() const noexcept;

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  double theta_;
};

/// A spin component in units of hbar/2. Only +1 and -1 are representable.
class SpinValue {
 public:
  explicit SpinValue(int value);

  static constexpr SpinValue up() noexcept { return SpinValue(Raw{1}); }
  static constexpr SpinValue down() noexcept { return SpinValue(Raw{-1}); }

  constexpr int value() const noexcept { return value_; }
  constexpr SpinValue operator-() const noexcept { return SpinValue(Raw{-value_}); }

  friend constexpr bool operator==(SpinValue, SpinValue) = default;

 private:
  struct Raw {
    int v;
  };
  constexpr explicit SpinValue(Raw raw) noexcept : value_(raw.v) {}

  int value_;
};

inline constexpr std::array<SpinValue, 2> kSpinValues = {SpinValue::up(),
                                                         SpinValue::down()};

enum class Particle { first = 1, second = 2 };

/// Maps 1 or 2 to a Particle; anything else throws std::invalid_argument.
Particle particle_from_index(int index);

/// Which observer's hidden-variable set anchors the analysis. Alice's
/// description conditions on lambda along axis 1, Bob's along axis 2.
enum class Description { alice, bob };

std::string to_string(Description d);
Description description_from_string(const std::string& name);

/// lambda^n_{j,-j}: an axis and the predetermined outcome j of particle 1.
/// Particle 2's outcome is always -j and is never stored.
struct HiddenVariable {
  Direction axis;
  SpinValue first_particle;

  SpinValue second_particle() const noexcept { return -first_particle; }
  SpinValue predetermined(Particle p) const noexcept {
    return p == Particle::first ? first_particle : second_particle();
  }
};

struct SpinVector {
  std::array<double, 3> components;

  double norm() const noexcept;
  double dot(const std::array<double, 3>& v) const noexcept;
};

/// Planar angle between two axes, in [0, pi].
double angle_between(const Direction& n, const Direction& m) noexcept;

/// n . m, evaluated as cos(theta_n - theta_m) so that equal axes give exactly 1.
double axis_cosine(const Direction& n, const Direction& m) noexcept;

SpinVector spin_vector(const HiddenVariable& lambda, Particle particle) noexcept;

/// Projection of the particle's spin vector on `axis`. Equal to the
/// predetermined outcome when `axis` is the hidden variable's own axis.
double mean_value(const HiddenVariable& lambda, Particle particle,
                  const Direction& axis) noexcept;

/// Pr(S = outcome | lambda, axis) = (1 + outcome * mean_value) / 2.
double conditional_outcome_prob(const HiddenVariable& lambda, Particle particle,
                                const Direction& axis, SpinValue outcome) noexcept;

/// Factorised joint probability of outcome r for particle 1 along axis1 and
/// q for particle 2 along axis2.
double joint_outcome_prob(const HiddenVariable& lambda, const Direction& axis1,
                          const Direction& axis2, SpinValue r, SpinValue q) noexcept;

/// sum_{k,l} k*l * joint_outcome_prob(lambda, axis1, axis2, k, l)
double pair_expectation(const HiddenVariable& lambda, const Direction& axis1,
                        const Direction& axis2) noexcept;

/// Correlation at the hidden-variable level. Only defined when lambda is
/// anchored on one of the two measurement axes; throws ContextError
/// otherwise.
double subquantum_correlation(const HiddenVariable& lambda, const Direction& axis1,
                              const Direction& axis2);

/// Mean of `particle` along `measure_axis`, averaged over both hidden
/// variables on `source_axis` with equal weights.
double marginal_expectation(const Direction& source_axis, Particle particle,
                            const Direction& measure_axis) noexcept;

/// <S1 S2> averaged over the hidden-variable set of the chosen description.
double averaged_pair_expectation(const Direction& axis1, const Direction& axis2,
                                 Description description) noexcept;

/// <S1 S2> - <S1><S2> averaged over the chosen description's hidden
/// variables. Equals -cos(angle_between(axis1, axis2)).
double quantum_correlation(const Direction& axis1, const Direction& axis2,
                           Description description) noexcept;

}  // namespace bellsim

#endif  // BELLSIM_MODEL_HPP
