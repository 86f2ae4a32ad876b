// Counter-based random numbers. Every draw is a pure function of
// (seed, stream_id, trial index, lane, block), so trials can be evaluated in
// any order or on any number of workers and still reproduce bit-for-bit.

#ifndef BELLSIM_RNG_HPP
#define BELLSIM_RNG_HPP

#include <array>
#include <cstdint>

namespace bellsim {

/// Philox4x32 with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Largest trial index addressable by a single stream.
inline constexpr std::uint64_t kMaxTrialsPerStream = std::uint64_t{1} << 32;

/// Sequential draws for one trial. Independent lanes let separate actors of
/// the same trial draw without sharing a sequence.
class TrialRng {
 public:
  TrialRng(RngStream stream, std::uint64_t trial, std::uint32_t lane = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// true with probability p (p <= 0 never, p >= 1 always).
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t trial_lo_;
  std::uint32_t lane_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace bellsim

#endif  // BELLSIM_RNG_HPP
