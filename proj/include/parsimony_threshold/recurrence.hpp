#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "parsimony_threshold/tree_model.hpp"

namespace parsimony_threshold {

// Slack absorbed as rounding when checking the probability box.
inline constexpr double kBoxSlack = 1e-12;

// alpha = P[Fitch set is exactly {true state}], beta = P[... {wrong state}].
struct AccuracyPair {
  double alpha = 1.0;
  double beta = 0.0;

  double sigma() const noexcept { return alpha + beta; }
  double delta() const noexcept { return alpha - beta; }
};

// d = alpha - beta, u = 3(alpha + beta) - 2. (0,0) is the no-information
// point, (1,1) the cutset boundary value.
struct DUPair {
  double d = 1.0;
  double u = 1.0;
};

DUPair to_du(AccuracyPair ab) noexcept;
AccuracyPair to_ab(DUPair du) noexcept;

// One Fitch level in probability space: the parent's (alpha, beta) from its
// children's pairs and the weights of the two child edges.
AccuracyPair ab_step(AccuracyPair left, AccuracyPair right, double w_left, double w_right);

// The same level in (d,u) coordinates:
//   d = (4 - u_r)/6 * w_l d_l + (4 - u_l)/6 * w_r d_r
//   u = 3/2 w_l w_r d_l d_r - 1/2 u_l u_r
DUPair du_step(DUPair left, DUPair right, double w_left, double w_right);

// Exact (d,u) at every vertex of the tree truncated at `cutset`, indexed by
// VertexId over cutset.frame_size(); entries outside T^pi are NaN.
std::vector<DUPair> propagate(const WeightedTree& tree, const Cutset& cutset);

// Same pass carried out with ab_step.
std::vector<AccuracyPair> propagate_ab(const WeightedTree& tree, const Cutset& cutset);

// 1/2 + d/2.
double reconstruction_accuracy(DUPair root);

// Root accuracy of maximum parsimony observed at `cutset`.
double exact_ra(const WeightedTree& tree, const Cutset& cutset);

enum class Regime { kSubThreshold, kCritical, kSuperThreshold };

// "sub-threshold", "critical", "super-threshold".
std::string to_string(Regime regime);

struct FixedPointReport {
  double p = 0.0;
  DUPair limit;
  long iterations = 0;
  bool converged = false;
  // Slope 4w/3 of the d-map at the no-information point; below one the
  // point is attracting.
  double linear_factor = 0.0;
  Regime regime = Regime::kSubThreshold;
  // Last max-norm step between successive iterates.
  double last_step = 0.0;
};

// Iterates du_step with equal children and w = 1 - 2p from the boundary
// value (1,1), i.e. the root pair on regular cutsets of growing depth.
// Stops once the successive step is below `tol` and a geometric
// extrapolation of the remaining distance is also below `tol`. Running out
// of iterations is reported, not thrown.
FixedPointReport homogeneous_limit(double p, double tol, long max_iters = 10'000'000);

// |d_root - sum_{x in inner} d_x prod_{root != z <= x} (4 - u_{s(z)})/6 w_z|
// with (d,u) propagated from `outer`. `inner` must be a cutset of T^outer.
double root_cutset_identity_residual(const WeightedTree& tree, const Cutset& outer,
                                     const Cutset& inner);

struct InvariantReport {
  std::size_t vertices_checked = 0;
  std::size_t bound_violations = 0;   // 0 <= d <= 1, -1/2 <= u <= 1
  std::size_t growth_violations = 0;  // d_parent >= w_child d_child / 2
  double worst_excess = 0.0;
};

InvariantReport check_invariants(const WeightedTree& tree, const Cutset& cutset,
                                 const std::vector<DUPair>& field, double slack = kBoxSlack);

}  // namespace parsimony_threshold
