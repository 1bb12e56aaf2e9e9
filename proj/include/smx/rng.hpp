#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace smx {

/// Counter-based 64-bit generator. Output k of a stream with key K is
/// mix(K + (k+1) * golden) where mix is the SplitMix64 finalizer, so any draw
/// is a pure function of (key, counter). Streams are split by hashing a seed
/// together with stream tags; simulation code derives one stream per group
/// and per purpose, which keeps generation order-independent.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag,
                                  std::uint64_t sub = 0) {
    return mix(mix(seed) ^ mix(0x6a09e667f3bcc909ULL + tag) ^ mix(0xbb67ae8584caa73bULL + sub));
  }

  std::uint64_t bits() { return mix(key_ + 0x9E3779B97F4A7C15ULL * (++counter_)); }

  /// Uniform on (0, 1]: 53-bit mantissa, never exactly zero.
  double uniform01() {
    return (double(bits() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes two counters per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n), by rejection on the top multiple of n.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v = bits();
    while (v >= limit) v = bits();
    return v % n;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace smx
