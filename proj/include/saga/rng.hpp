#ifndef SAGA_RNG_HPP
#define SAGA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace saga {

/// splitmix64 finalizer; good avalanche, used for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic seed for a named stream of a run. Streams with distinct
/// (tag, a, b) never collide in practice; replicate evaluation order does
/// not matter because every replicate seed is derived independently.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix64(base ^ (tag * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (a * 0xc2b2ae3d27d4eb4fULL));
  h = mix64(h ^ (b * 0x165667b19e3779f9ULL));
  return h;
}

// stream tags for the optimisation runs
inline constexpr std::uint64_t kStreamVariation = 1;  // init pop + GA operators
inline constexpr std::uint64_t kStreamReplicate = 2;  // per-replicate objective seeds
inline constexpr std::uint64_t kStreamModel = 3;      // surrogate fitting restarts

/// mt19937_64 engine with fixed-layout distribution helpers. The standard
/// pins the engine's output sequence, and the helpers below avoid
/// std::*_distribution, so streams are bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// uniform in (0, 1]
  double uniform_open0() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// uniform integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    const double u = uniform();
    int v = lo + static_cast<int>(u * (static_cast<double>(hi) - lo + 1.0));
    return v > hi ? hi : v;
  }

  /// standard normal via Box-Muller; consumes exactly two engine draws
  double normal() {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// exponential with the given mean; mean 0 returns 0
  double exponential(double mean) {
    if (mean <= 0.0) return 0.0;
    return -mean * std::log(uniform_open0());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace saga

#endif
