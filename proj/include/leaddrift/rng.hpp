#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace leaddrift {

// All randomness in the toolkit flows through Rng: std::mt19937_64 (the
// 64-bit Mersenne Twister, whose algorithm and seeding are pinned by the
// C++ standard) plus fixed transforms below. Standard-library distribution
// objects are deliberately avoided because their output is
// implementation-defined; with these transforms a seed produces the same
// stream on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range via Lemire's multiply-shift reduction.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const auto r = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * span) >> 64);
    return lo + static_cast<std::int64_t>(r);
  }

  // Box-Muller; consumes two uniforms per draw, no cached spare.
  double normal(double mean = 0.0, double sigma = 1.0) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace detail

// Stage seeds are derived, never reused: splitmix64 over the base seed,
// an FNV-1a hash of the stage tag, and an optional index. This is the
// documented derivation behind the CLI's single --seed flag.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stage,
                                 std::uint64_t index = 0) {
  return detail::splitmix64(base ^ detail::fnv1a64(stage) ^
                            index * 0x9E3779B97F4A7C15ull);
}

}  // namespace leaddrift
