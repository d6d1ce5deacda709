#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace htrpn {

// splitmix64 finalizer; used to turn (seed, salt) pairs into well-mixed
// engine seeds so parallel trials can share one master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt));
}

// Stream salts. Samplers and the simulation harness derive all their
// sub-seeds through these so that paired strategies consume identical
// positive/scene draws.
inline constexpr std::uint64_t kSaltPositives = 0x706f73;   // "pos"
inline constexpr std::uint64_t kSaltNegatives = 0x6e6567;   // "neg"
inline constexpr std::uint64_t kSaltScene = 0x7363656e;     // "scen"
inline constexpr std::uint64_t kSaltScores = 0x7363726f;    // "scro"
inline constexpr std::uint64_t kSaltSample = 0x73616d70;    // "samp"
inline constexpr std::uint64_t kSaltBatchStats = 0x627374;  // "bst"

// mt19937_64 with hand-rolled bounded/real draws. The engine's raw output
// is fully specified by the standard; std::uniform_*_distribution is not,
// so reports stay byte-identical across toolchains and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

  std::uint64_t next() { return eng_(); }

  // Unbiased integer in [0, n) (Lemire multiply-shift with rejection).
  std::uint64_t bounded(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0ull - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    bounded(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Box-Muller; two uniforms per draw, no cached state.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - real01();  // (0, 1]
    const double u2 = real01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace htrpn
