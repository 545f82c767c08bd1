#pragma once

#include <cstdint>
#include <utility>

namespace gbst {

/// Counter-based generator: value(i) = splitmix64_mix(key + (i + 1) * 0x9E3779B97F4A7C15).
/// Any draw is addressable without generating its predecessors, so parallel
/// and serial consumers see identical streams.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  // Independent stream for item `index` under `seed`: key = mix(mix(seed) ^ index).
  static constexpr CounterRng stream(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(mix(mix(seed) ^ index));
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t at(std::uint64_t counter) const { return mix(key_ + (counter + 1) * kGamma); }

  // Uniform on (0, 1]: ((bits >> 11) + 1) * 2^-53.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>((at(counter) >> 11) + 1) * 0x1.0p-53;
  }

  // Box-Muller on draws 2p and 2p+1: (r cos(2 pi u2), r sin(2 pi u2)), r = sqrt(-2 ln u1).
  std::pair<double, double> normal_pair(std::uint64_t pair_index) const;

  // The j-th standard normal of the stream (pairs consumed cos first, then sin).
  double normal(std::uint64_t j) const;

 private:
  std::uint64_t key_;
};

}  // namespace gbst
