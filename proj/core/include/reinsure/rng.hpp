#pragma once

#include <cmath>
#include <cstdint>

namespace reinsure {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: draw i of stream (seed, k) is a pure function of
/// (seed, k, i).  Streams for different k are independent, so path k of a
/// Monte Carlo run can be regenerated without touching any other path.
class CounterRng {
public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(mix64(seed + kGamma) ^ (stream * 0xd1342543de82ef95ULL + kGamma))) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + kGamma * ++counter_); }

  /// Uniform in the open interval (0, 1).
  constexpr double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate; +inf for rate 0.
  double exponential(double rate) noexcept {
    if (rate <= 0.0) return INFINITY;
    return -std::log(uniform()) / rate;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace reinsure
