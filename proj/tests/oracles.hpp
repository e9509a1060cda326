#pragma once

// Test-only reference computations. Everything here works from definitions
// (enumeration over assignments or cutsets) and shares no code path with the
// dynamic programs under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <vector>

#include "parsimony_threshold/tree_model.hpp"

namespace oracle {

using parsimony_threshold::Cutset;
using parsimony_threshold::VertexId;
using parsimony_threshold::WeightedTree;
namespace heap = parsimony_threshold::heap;

inline std::vector<VertexId> internal_vertices(const Cutset& cut) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < cut.frame_size(); ++v) {
    if (cut.role(v) == Cutset::Role::kInternal) out.push_back(v);
  }
  return out;
}

struct ParsimonyMin {
  int score = std::numeric_limits<int>::max();
  std::set<int> root_states;  // root states attaining the minimum
};

// Minimum number of changes over all 2^{#internal} internal assignments.
// `leaf_state(v)` gives the observed state of cutset vertex v.
inline ParsimonyMin brute_force_parsimony(const Cutset& cut,
                                          const std::function<int(VertexId)>& leaf_state) {
  const auto internal = internal_vertices(cut);
  std::vector<int> state(cut.frame_size(), 0);
  for (VertexId v : cut.vertices()) state[v] = leaf_state(v);
  ParsimonyMin best;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << internal.size()); ++a) {
    for (std::size_t i = 0; i < internal.size(); ++i) state[internal[i]] = (a >> i) & 1;
    int changes = 0;
    for (VertexId v = 1; v < cut.frame_size(); ++v) {
      if (cut.in_tree(v)) changes += state[v] != state[heap::parent(v)];
    }
    if (changes < best.score) {
      best.score = changes;
      best.root_states.clear();
    }
    if (changes == best.score) best.root_states.insert(state[0]);
  }
  return best;
}

// Every cutset of the complete tree truncated at level n, as vertex lists.
inline std::vector<std::vector<VertexId>> all_cutsets(VertexId x, int n) {
  if (heap::level(x) == n) return {{x}};
  std::vector<std::vector<VertexId>> out{{x}};
  const auto left = all_cutsets(heap::left_child(x), n);
  const auto right = all_cutsets(heap::right_child(x), n);
  for (const auto& a : left) {
    for (const auto& b : right) {
      auto merged = a;
      merged.insert(merged.end(), b.begin(), b.end());
      out.push_back(std::move(merged));
    }
  }
  return out;
}

// sum_{x in pi} prod_{root != z <= x} w_z / kappa, straight from the definition.
inline double cutset_sum(const WeightedTree& tree, const std::vector<VertexId>& pi, double kappa) {
  double total = 0.0;
  for (VertexId x : pi) {
    double term = 1.0;
    for (VertexId z = x; z != 0; z = heap::parent(z)) term *= tree.weight(z) / kappa;
    total += term;
  }
  return total;
}

inline double exhaustive_min_cutset_sum(const WeightedTree& tree, int n, double kappa) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pi : all_cutsets(0, n)) best = std::min(best, cutset_sum(tree, pi, kappa));
  return best;
}

// Exact accuracy by enumerating the joint states of every vertex of T^pi,
// weighting by the CF path probabilities, and running the Fitch rules inline.
inline double joint_enumeration_ra(const WeightedTree& tree, const Cutset& cut) {
  std::vector<VertexId> verts;
  for (VertexId v = 0; v < cut.frame_size(); ++v) {
    if (cut.in_tree(v)) verts.push_back(v);
  }
  std::vector<int> state(cut.frame_size(), 0);
  std::vector<int> set(cut.frame_size(), 0);  // bit s = state s possible
  double ra = 0.0;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << verts.size()); ++a) {
    double prob = 0.5;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const VertexId v = verts[i];
      state[v] = (a >> i) & 1;
      if (v != 0) {
        const double p = (1.0 - tree.weight(v)) / 2.0;
        prob *= state[v] == state[heap::parent(v)] ? 1.0 - p : p;
      }
    }
    for (auto it = verts.rbegin(); it != verts.rend(); ++it) {
      const VertexId v = *it;
      if (cut.contains(v)) {
        set[v] = 1 << state[v];
      } else {
        const int l = set[heap::left_child(v)];
        const int r = set[heap::right_child(v)];
        set[v] = (l & r) ? (l & r) : (l | r);
      }
    }
    if (set[0] == (1 << state[0])) ra += prob;
    else if (set[0] == 3) ra += 0.5 * prob;
  }
  return ra;
}

}  // namespace oracle
