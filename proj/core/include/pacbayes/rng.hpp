#pragma once

#include <cstdint>
#include <limits>

namespace pacbayes {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Key of the independent stream `index` below `seed`. Used to give every
// Monte-Carlo trial its own generator so results do not depend on scheduling.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based generator: the i-th output is a pure function of (key, i).
///
/// Streams are split by hashing, never by advancing a shared state, which is
/// what makes parallel trial loops reproducible bit for bit. Models the
/// standard UniformRandomBitGenerator concept so it can drive <random>
/// adaptors, but the library itself only uses uniform01() because the
/// standard distributions are implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed ^ kSalt)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(key_ + kGamma * ++counter_); }

  /// Uniform double on [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Rademacher sign, +1 or -1 with probability 1/2 each.
  constexpr int sign() noexcept { return ((*this)() >> 63) != 0 ? 1 : -1; }

  [[nodiscard]] constexpr CounterRng split(std::uint64_t index) const noexcept {
    return CounterRng(derive_stream(key_, index));
  }

  [[nodiscard]] constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kSalt = 0xa0761d6478bd642fULL;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pacbayes
