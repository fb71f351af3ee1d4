// Deterministic random number generation. Everything downstream (design
// matrices, Monte Carlo trials) is keyed off 64-bit seeds through the
// splitmix64 mixer, so a (seed, index...) tuple always regenerates the
// same stream regardless of platform or library version.

#ifndef SPARC_RNG_HPP
#define SPARC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sparc {

// splitmix64 output/finalizer function.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Key derivation: fold extra words into a base seed one at a time.
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ (a + 0x9e3779b97f4a7c15ull));
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_key(mix_key(seed, a), b);
}

// Per-trial seed for experiment campaigns: hash of (base, grid index,
// trial index). Injectivity over a run is checked by the caller.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t grid_index,
                                 std::uint64_t trial_index) {
  return mix_key(base, grid_index, trial_index);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double next_unit() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double next_unit_co() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Standard normal variates via Box-Muller on a SplitMix64 stream.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.next_unit();
    const double u2 = rng_.next_unit_co();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  SplitMix64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sparc

#endif  // SPARC_RNG_HPP
