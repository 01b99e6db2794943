#pragma once

#include <cstdint>
#include <string_view>

namespace dodwda {

/// SplitMix64 stream. Small, fast, and fully specified here so that
/// simulation draws are identical across standard-library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, 1) with 53 bits of resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  /// Fair coin.
  bool bernoulli() { return (next_u64() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

/// Derives an independent substream from a master seed and a label, so
/// that draws for one purpose (e.g. capacities) never shift draws for
/// another (e.g. the setpoint path) when parameters change.
inline SplitMix64 substream(std::uint64_t master_seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
  for (char c : label) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  SplitMix64 mix(master_seed ^ h);
  mix.next_u64();
  return SplitMix64(mix.next_u64());
}

}  // namespace dodwda
