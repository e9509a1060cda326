#pragma once

#include <cstdint>
#include <vector>

#include "parsimony_threshold/rng.hpp"
#include "parsimony_threshold/tree_model.hpp"

namespace parsimony_threshold {

struct SubstitutionProbability {
  double p;  // P[child state differs from parent]
  double q;  // 1 - p
};

// p = (1 - w) / 2 for an edge of weight w in [0, 1].
SubstitutionProbability substitution_probability(double w);

// Bit-packed map VertexId -> {0,1} over one truncated tree, with a parallel
// bitmap recording which vertices have been assigned.
class StateAssignment {
 public:
  StateAssignment() = default;
  explicit StateAssignment(VertexId frame_size);

  VertexId frame_size() const noexcept { return frame_size_; }

  void set(VertexId v, int state) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (v & 63);
    defined_[v >> 6] |= bit;
    if (state) values_[v >> 6] |= bit; else values_[v >> 6] &= ~bit;
  }
  int get(VertexId v) const noexcept { return static_cast<int>((values_[v >> 6] >> (v & 63)) & 1); }
  bool defined(VertexId v) const noexcept {
    return v < frame_size_ && ((defined_[v >> 6] >> (v & 63)) & 1) != 0;
  }

  // Forgets every assignment while keeping the allocation.
  void reset(VertexId frame_size);

 private:
  VertexId frame_size_ = 0;
  std::vector<std::uint64_t> values_;
  std::vector<std::uint64_t> defined_;
};

// One draw of the CF process on the tree truncated at `cutset`: the root is a
// fair coin; a child copies its parent with probability w and is otherwise
// uniform. Edge randomness is keyed by vertex id within the stream.
StateAssignment sample_states(const WeightedTree& tree, const Cutset& cutset, CounterRng rng);

// Same draw, reusing `out`'s storage.
void sample_states_into(const WeightedTree& tree, const Cutset& cutset, CounterRng rng,
                        StateAssignment& out);

}  // namespace parsimony_threshold
