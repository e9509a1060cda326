#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parsimony_threshold/tree_model.hpp"

namespace parsimony_threshold {

// Per-vertex membership flags indexed by VertexId. Used for thinned
// subtrees; a vertex counts only if it and all its ancestors are flagged.
using VertexMask = std::vector<std::uint8_t>;

// inf over cutsets pi of the truncated tree of
//   sum_{x in pi} prod_{root != z <= x} w_z / kappa
// computed by the post-order program f(x) = min(1, sum_c (w_c/kappa) f(c))
// with f = 1 on the truncation boundary. Returns f(root).
double min_cutset_sum(const WeightedTree& tree, double kappa);

// Same, truncated at `truncation` (a cutset within the tree). With a mask,
// only flagged vertices exist; a flagged vertex with no flagged child above
// the truncation is a dead end and contributes 0.
double min_cutset_sum(const WeightedTree& tree, const Cutset& truncation, double kappa,
                      const VertexMask* subtree = nullptr);

struct BranchingProbe {
  double kappa;
  int depth;
  double value;
};

struct BranchingEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool converged = false;
  std::vector<BranchingProbe> probes;
};

// Bisection on kappa. A probe is sub-critical when min_cutset_sum decays
// geometrically between the last two depths of the schedule, at a per-level
// ratio below 1 - tol/(4 kappa); the implied critical value kappa * ratio
// then sits at least tol/4 below the probe. The bracket is narrowed to
// tol/4 and reported shifted down by that offset. The schedule is
// implicitly preceded by depth 0 (value 1).
BranchingEstimate estimate_branching_number(const WeightedTree& tree, std::span<const int> depths,
                                            double tol, const VertexMask* subtree = nullptr);

BranchingEstimate estimate_branching_number(const WeightModel& model, std::uint64_t seed,
                                            std::span<const int> depths, double tol,
                                            BuildOptions options = {});

struct Theorem1Check {
  bool holds = false;
  // False when the estimate lies within tol of 3/2 or did not converge.
  bool conclusive = false;
  double margin = 0.0;  // estimate - 3/2
  double min_weight = 0.0;
  BranchingEstimate estimate;
};

// Branching number above 3/2 by more than tol, and a positive minimum weight
// over the truncated tree.
Theorem1Check theorem1_condition(const WeightModel& model, std::uint64_t seed,
                                 std::span<const int> depths, double tol, BuildOptions options = {});

struct CouplingConstants {
  int H = 0;
  double eps_prime = 0.0;
};

// H: least H >= 0 with (1/2)^(2^H - 1) <= phi'. eps': largest value with
// 3/2 [eps' (2/theta*)^(H+1)]^2 <= phi' and eps' (2/theta*)^(H+1) <= 0.99.
CouplingConstants coupling_constants(double phi_prime, double theta_star);

struct PercolationSample {
  double theta_star = 0.0;
  int H = 0;
  // Deepest level whose membership is determined by the tree.
  int levels = 0;
  // I_z = 1{w_z > theta*}.
  VertexMask open;
  // x is a member iff every non-root z <= x has all of D_{H+1}(z) open.
  VertexMask member;

  bool in_subtree(VertexId v) const { return v < member.size() && member[v] != 0; }
  bool reaches_level(int n) const;
};

// Needs depth_bound >= H + 2 so that the root's children are decidable.
PercolationSample percolation_subtree(const WeightedTree& tree, double theta_star, int H);

// Lazy depth-first search of the same subtree on the untruncated tree with
// weights from `model` keyed by `seed`. True iff it reaches level `depth`.
bool percolation_survives(const WeightModel& model, std::uint64_t seed, double theta_star, int H,
                          int depth);

// ((1 - q)/q)^2 for q > 1/2, else 1.
double extinction_probability(double q_tilde);

// Each non-root vertex independently open with probability q_tilde; members
// are vertices whose whole ancestral line is open.
VertexMask bernoulli_subtree(const WeightedTree& tree, double q_tilde, std::uint64_t seed);

}  // namespace parsimony_threshold
