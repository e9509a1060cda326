#pragma once

#include <cstdint>

namespace parsimony_threshold {

// Counter-based random stream. Every draw is a pure function of
// (key, lane, counter), so per-vertex values do not depend on traversal order
// and trials can run on any thread.
class CounterRng {
 public:
  // Independent purposes draw from disjoint lanes.
  enum Lane : std::uint64_t {
    kWeight = 1,
    kRootState = 2,
    kEdgeCopy = 3,
    kEdgeResample = 4,
    kTieBreak = 5,
    kPercolation = 6,
    kThinning = 7,
  };

  constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  // Key for trial `trial` of an experiment seeded with `seed`.
  static constexpr CounterRng for_trial(std::uint64_t seed, std::uint64_t trial) noexcept {
    return CounterRng(mix(mix(seed ^ 0x5851f42d4c957f2dULL) + trial));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits(Lane lane, std::uint64_t counter) const noexcept {
    std::uint64_t h = mix(key_ + kGolden * (static_cast<std::uint64_t>(lane) + 1));
    return mix(h ^ mix(counter + 0xd1b54a32d192ed03ULL));
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  constexpr double uniform(Lane lane, std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(lane, counter) >> 11) * 0x1.0p-53;
  }

  constexpr bool coin(Lane lane, std::uint64_t counter) const noexcept {
    return (bits(lane, counter) >> 63) != 0;
  }

  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
};

}  // namespace parsimony_threshold
