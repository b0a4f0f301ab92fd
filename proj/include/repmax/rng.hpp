#pragma once

// Seedable, platform-independent randomness. Everything that needs
// reproducible draws (fold shuffling, corpus generation) goes through
// SplitMix64 with hand-rolled transforms; std:: distributions are avoided
// because their output is not pinned across standard library implementations.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace repmax {

inline constexpr const char* kPrngName = "splitmix64";

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Box-Muller; deterministic given the stream position.
  double normal(double mean, double sd) {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * mag * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// FNV-1a 64-bit; the documented stable hash for user subsampling.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Derives an independent per-entity stream from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 mix(master ^ (0x9E3779B97F4A7C15ull * (index + 1)));
  return mix.next_u64();
}

}  // namespace repmax
