#pragma once

// Deterministic random / low-discrepancy sources. Instance generation must be
// reproducible bit-for-bit across platforms, so we fix the exact algorithms
// here instead of relying on std::mt19937 distributions:
//   * splitmix64 expands a 64-bit seed into the xoshiro256++ state,
//   * xoshiro256++ provides the stream; uniform doubles take the top 53 bits,
//   * Halton sequences drive the sampled (falsifier-style) geometric checks.

#include <cstdint>

namespace refloc::detail {

struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// k-th element (k >= 0) of the Halton sequence in the given prime base.
inline double halton(std::uint64_t k, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  std::uint64_t i = k + 1;  // skip the leading zero
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline std::uint64_t nth_prime(int n) {
  constexpr std::uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                      31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  return primes[n % 20];
}

}  // namespace refloc::detail
