#pragma once

// Portable counter-based random streams.
//
// A stream is identified by a 64-bit key. Its i-th output (i = 1, 2, ...) is
//   mix64(key + i * 0x9E3779B97F4A7C15)            (mod 2^64)
// where mix64 is the SplitMix64 finalizer. Sub-streams are derived by
// folding tags into the key with derive_key(), so adding a new consumer never
// shifts the draws of an existing one.
//
// Conversions:
//   uniform()       (x >> 11) * 2^-53                  in [0, 1)
//   uniform_open()  ((x >> 11) + 0.5) * 2^-53          in (0, 1)
//   below(n)        rejection sampling on x            in [0, n)
//   normal()        inverse normal CDF of uniform_open(), Acklam's rational
//                   approximation refined by one Halley step

#include <cstdint>
#include <initializer_list>

namespace smc::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Folds tags into a seed, one at a time, in order.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(seed + kGolden);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + kGolden));
  return h;
}

/// Inverse of the standard normal CDF for p in (0, 1).
double normal_quantile(double p);

class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  double normal() { return normal_quantile(uniform_open()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Purpose tags used when deriving per-trial streams.
enum class Purpose : std::uint64_t { Truth = 1, Mask = 2, Noise = 3, Rows = 4 };

}  // namespace smc::rng
