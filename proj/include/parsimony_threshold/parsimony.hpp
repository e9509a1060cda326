#pragma once

#include <cstdint>
#include <vector>

#include "parsimony_threshold/cf_simulator.hpp"
#include "parsimony_threshold/rng.hpp"
#include "parsimony_threshold/tree_model.hpp"

namespace parsimony_threshold {

// Subset of {0,1} as a two-bit mask: bit s set iff state s is in the set.
enum class FitchSet : std::uint8_t { kEmpty = 0, kZero = 1, kOne = 2, kBoth = 3 };

constexpr FitchSet singleton(int state) noexcept { return state ? FitchSet::kOne : FitchSet::kZero; }

constexpr bool is_singleton(FitchSet s) noexcept { return s == FitchSet::kZero || s == FitchSet::kOne; }

constexpr bool contains(FitchSet s, int state) noexcept {
  return (static_cast<std::uint8_t>(s) >> (state ? 1 : 0)) & 1;
}

// Bottom-up Fitch rule for an internal vertex. Sets `was_union` when the
// children's sets are disjoint.
constexpr FitchSet fitch_merge(FitchSet a, FitchSet b, bool& was_union) noexcept {
  const auto x = static_cast<std::uint8_t>(a);
  const auto y = static_cast<std::uint8_t>(b);
  was_union = (x & y) == 0;
  return static_cast<FitchSet>(was_union ? (x | y) : (x & y));
}

constexpr FitchSet complement(FitchSet s) noexcept {
  switch (s) {
    case FitchSet::kZero: return FitchSet::kOne;
    case FitchSet::kOne: return FitchSet::kZero;
    default: return s;
  }
}

struct FitchResult {
  // Indexed by VertexId over the cutset's frame; kEmpty outside T^pi.
  std::vector<FitchSet> sets;
  // Internal vertices whose children's sets were disjoint.
  int union_events = 0;

  FitchSet root() const { return sets.at(kRoot); }
};

// Only the states on cutset vertices are read. Throws ValidationError when a
// cutset vertex has no state.
FitchResult fitch_bottom_up(const WeightedTree& tree, const Cutset& cutset,
                            const StateAssignment& states);

// Singleton -> its element; {0,1} -> fair coin from the tie-break lane.
int mp_root_estimate(FitchSet root_set, CounterRng rng);

// Minimum number of state changes over all internal extensions of the
// cutset states.
int parsimony_score(const WeightedTree& tree, const Cutset& cutset, const StateAssignment& states);

}  // namespace parsimony_threshold
