#include "parsimony_threshold/parsimony.hpp"

#include <fmt/format.h>

#include "parsimony_threshold/errors.hpp"

namespace parsimony_threshold {

FitchResult fitch_bottom_up(const WeightedTree& tree, const Cutset& cutset,
                            const StateAssignment& states) {
  tree.require_within(cutset);
  FitchResult result;
  const VertexId n = cutset.frame_size();
  result.sets.assign(n, FitchSet::kEmpty);
  for (VertexId v = n; v-- > 0;) {
    switch (cutset.role(v)) {
      case Cutset::Role::kOutside:
        break;
      case Cutset::Role::kBoundary:
        if (!states.defined(v)) {
          throw ValidationError(fmt::format("no state for cutset vertex {}", v));
        }
        result.sets[v] = singleton(states.get(v));
        break;
      case Cutset::Role::kInternal: {
        bool was_union = false;
        result.sets[v] = fitch_merge(result.sets[heap::left_child(v)],
                                     result.sets[heap::right_child(v)], was_union);
        result.union_events += was_union ? 1 : 0;
        break;
      }
    }
  }
  return result;
}

int mp_root_estimate(FitchSet root_set, CounterRng rng) {
  switch (root_set) {
    case FitchSet::kZero: return 0;
    case FitchSet::kOne: return 1;
    case FitchSet::kBoth: return rng.coin(CounterRng::kTieBreak, 0) ? 1 : 0;
    case FitchSet::kEmpty: break;
  }
  throw ValidationError("Fitch set is empty");
}

int parsimony_score(const WeightedTree& tree, const Cutset& cutset, const StateAssignment& states) {
  return fitch_bottom_up(tree, cutset, states).union_events;
}

}  // namespace parsimony_threshold
