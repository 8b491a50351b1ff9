#pragma once

// Counter-based generator used for every random quantity in veplab.
//
// Algorithm "splitmix64-counter-v1":
//   mix(z)            = SplitMix64 finalizer (Steele, Lea & Flood 2014):
//                         z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                         z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                         z ^ (z >> 31)
//   stream_key(s, i)  = mix(s ^ mix(i + 1) * GOLDEN)      GOLDEN = 0x9E3779B97F4A7C15
//   word(key, k)      = mix(key + (k + 1) * GOLDEN)       k = 0, 1, 2, ...
//   uniform01(word)   = (word >> 11) * 2^-53              in [0, 1)
//
// All arithmetic is modulo 2^64, so any language with 64-bit unsigned integers
// reproduces the stream bit-exactly. White-noise code values for class c under
// seed s are uniform01(word(stream_key(s, c), k)) for frame k.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace veplab {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr const char* kGeneratorName = "splitmix64-counter-v1";

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64_mix(seed ^ (splitmix64_mix(stream + 1) * kGolden));
}

constexpr std::uint64_t counter_word(std::uint64_t key, std::uint64_t counter) noexcept {
  return splitmix64_mix(key + (counter + 1) * kGolden);
}

constexpr double to_unit_interval(std::uint64_t word) noexcept {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Sequential view over one stream. Gaussian draws use Box-Muller on two
// consecutive uniforms and cache the second deviate.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_(stream_key(seed, stream)) {}

  std::uint64_t next_u64() noexcept { return counter_word(key_, counter_++); }
  double uniform() noexcept { return to_unit_interval(next_u64()); }

  // Uniform integer in [0, bound) by multiply-shift; bias is below 2^-32 for bound < 2^32.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace veplab
