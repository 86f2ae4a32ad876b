#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Counter words: (lane << 16 | block, trial, stream low, stream high).
// Key words: seed low, seed high.
TrialRng::TrialRng(RngStream stream, std::uint64_t trial, std::uint32_t lane) noexcept
    : key_{static_cast<std::uint32_t>(stream.seed),
           static_cast<std::uint32_t>(stream.seed >> 32)},
      trial_lo_(static_cast<std::uint32_t>(trial)),
      lane_(lane),
      stream_lo_(static_cast<std::uint32_t>(stream.stream_id)),
      stream_hi_(static_cast<std::uint32_t>(stream.stream_id >> 32)) {}

void TrialRng::refill() noexcept {
  buffer_ = philox4x32_10({(lane_ << 16) | (block_ & 0xFFFFu), trial_lo_, stream_lo_,
                           stream_hi_},
                          key_);
  ++block_;
  used_ = 0;
}

std::uint64_t TrialRng::next_u64() noexcept {
  if (used_ > 2) refill();
  const std::uint64_t v = (static_cast<std::uint64_t>(buffer_[used_]) << 32) |
                          buffer_[used_ + 1];
  used_ += 2;
  return v;
}

double TrialRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace bellsim
