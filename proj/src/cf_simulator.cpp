#include "parsimony_threshold/cf_simulator.hpp"

#include <fmt/format.h>

#include "parsimony_threshold/errors.hpp"

namespace parsimony_threshold {

SubstitutionProbability substitution_probability(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError(fmt::format("weight {} outside [0,1]", w));
  const double p = 0.5 * (1.0 - w);
  return {p, 1.0 - p};
}

StateAssignment::StateAssignment(VertexId frame_size) { reset(frame_size); }

void StateAssignment::reset(VertexId frame_size) {
  frame_size_ = frame_size;
  const std::size_t words = (frame_size + 63) / 64;
  values_.assign(words, 0);
  defined_.assign(words, 0);
}

void sample_states_into(const WeightedTree& tree, const Cutset& cutset, CounterRng rng,
                        StateAssignment& out) {
  tree.require_within(cutset);
  const VertexId n = cutset.frame_size();
  out.reset(n);
  out.set(kRoot, rng.coin(CounterRng::kRootState, 0) ? 1 : 0);
  // Heap order visits every parent before its children.
  for (VertexId v = 1; v < n; ++v) {
    if (!cutset.in_tree(v)) continue;
    const int parent_state = out.get(heap::parent(v));
    const bool copy = rng.uniform(CounterRng::kEdgeCopy, v) < tree.weight(v);
    out.set(v, copy ? parent_state : (rng.coin(CounterRng::kEdgeResample, v) ? 1 : 0));
  }
}

StateAssignment sample_states(const WeightedTree& tree, const Cutset& cutset, CounterRng rng) {
  StateAssignment out;
  sample_states_into(tree, cutset, rng, out);
  return out;
}

}  // namespace parsimony_threshold
