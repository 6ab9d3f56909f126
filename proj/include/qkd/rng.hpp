#pragma once

#include <cstdint>
#include <random>

namespace qkd {

/// Finalizing 64-bit mixing permutation (splitmix64). Used to derive
/// per-run child seeds from a master seed: child = mix64(master ^ index).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ index);
}

/// Explicit seeded stream. Never shared between concurrent workers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  bool next_bit() { return (next_u64() >> 63) != 0; }

  /// Uniform in [0, 1). 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    // rejection from the top to avoid modulo bias
    std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qkd
