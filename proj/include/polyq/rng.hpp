#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polyq {

// All randomness in the library flows through this header. mt19937_64 has
// standard-pinned output, and the uniform/normal mappings below are written
// out by hand because the std distribution objects are not pinned across
// implementations. Reruns with the same seeds are byte-identical anywhere.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Decorrelated per-stream seed from a base seed. Stream 0 is distinct from
// the base itself, so the base can also be used directly.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base + 0x9E3779B97F4A7C15ull * (stream + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0,1) with 53 random bits, exact dyadic rationals.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

  // Uniform on [-m, m].
  double symmetric(double m) { return uniform(-m, m); }

  // Box-Muller without caching the second deviate, so each call consumes a
  // fixed number of engine outputs regardless of call history.
  double gaussian() {
    double u1 = canonical();
    while (u1 <= 0.0) u1 = canonical();
    double u2 = canonical();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace polyq
