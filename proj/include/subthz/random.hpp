// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams. Every draw is a pure function of
// (key, counter), so results do not depend on the standard library's
// distribution implementations or on evaluation order across threads.

#ifndef SUBTHZ_RANDOM_HPP
#define SUBTHZ_RANDOM_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace subthz {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

/// Seed for one sweep point: hash of the master seed and the axis value bits.
inline std::uint64_t derive_seed(std::uint64_t master, double axis_value, std::uint64_t salt = 0) {
  return hash_combine(hash_combine(master, std::bit_cast<std::uint64_t>(axis_value)), salt);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(splitmix64(key)) {}

  std::uint64_t bits(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter)); }
  std::uint64_t next_bits() { return bits(counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  double next_uniform() { return uniform(counter_++); }

  /// Circularly-symmetric complex Gaussian with E|n|^2 = variance (Box-Muller).
  std::complex<double> next_complex_gaussian(double variance) {
    const double u1 = 1.0 - next_uniform();  // (0, 1]
    const double u2 = next_uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace subthz

#endif  // SUBTHZ_RANDOM_HPP
