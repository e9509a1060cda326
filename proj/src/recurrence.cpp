#include "parsimony_threshold/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "parsimony_threshold/cf_simulator.hpp"
#include "parsimony_threshold/errors.hpp"

namespace parsimony_threshold {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Clamps x into [lo, hi] when it is outside by rounding only.
double snap(double x, double lo, double hi, const char* what) {
  if (x >= lo && x <= hi) return x;
  if (x >= lo - kBoxSlack && x <= hi + kBoxSlack) return std::clamp(x, lo, hi);
  throw ValidationError(fmt::format("{} = {} outside [{}, {}]", what, x, lo, hi));
}

AccuracyPair checked(AccuracyPair ab) {
  ab.alpha = snap(ab.alpha, 0.0, 1.0, "alpha");
  ab.beta = snap(ab.beta, 0.0, 1.0, "beta");
  const double excess = ab.alpha + ab.beta - 1.0;
  if (excess > kBoxSlack) throw ValidationError(fmt::format("alpha + beta exceeds 1 by {}", excess));
  if (excess > 0.0) ab.beta -= excess;
  return ab;
}

DUPair checked(DUPair du) {
  du.d = snap(du.d, 0.0, 1.0, "d");
  du.u = snap(du.u, -0.5, 1.0, "u");
  return du;
}

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError(fmt::format("weight {} outside [0,1]", w));
}

template <typename Pair, typename Step>
std::vector<Pair> propagate_with(const WeightedTree& tree, const Cutset& cutset, Pair boundary,
                                 Pair outside, Step step) {
  tree.require_within(cutset);
  const VertexId n = cutset.frame_size();
  std::vector<Pair> field(n, outside);
  for (VertexId v = n; v-- > 0;) {
    switch (cutset.role(v)) {
      case Cutset::Role::kOutside: break;
      case Cutset::Role::kBoundary: field[v] = boundary; break;
      case Cutset::Role::kInternal: {
        const VertexId l = heap::left_child(v);
        const VertexId r = heap::right_child(v);
        field[v] = step(field[l], field[r], tree.weight(l), tree.weight(r));
        break;
      }
    }
  }
  return field;
}

}  // namespace

DUPair to_du(AccuracyPair ab) noexcept { return {ab.delta(), 3.0 * ab.sigma() - 2.0}; }

AccuracyPair to_ab(DUPair du) noexcept {
  const double sigma = (du.u + 2.0) / 3.0;
  return {0.5 * (sigma + du.d), 0.5 * (sigma - du.d)};
}

AccuracyPair ab_step(AccuracyPair left, AccuracyPair right, double w_left, double w_right) {
  left = checked(left);
  right = checked(right);
  const auto [pl, ql] = substitution_probability(w_left);
  const auto [pr, qr] = substitution_probability(w_right);
  // Child set is the parent's state, the other state, or {0,1}.
  const double hit_l = ql * left.alpha + pl * left.beta;
  const double miss_l = pl * left.alpha + ql * left.beta;
  const double tie_l = 1.0 - left.alpha - left.beta;
  const double hit_r = qr * right.alpha + pr * right.beta;
  const double miss_r = pr * right.alpha + qr * right.beta;
  const double tie_r = 1.0 - right.alpha - right.beta;
  return checked(AccuracyPair{hit_l * hit_r + hit_l * tie_r + tie_l * hit_r,
                  miss_l * miss_r + miss_l * tie_r + tie_l * miss_r});
}

DUPair du_step(DUPair left, DUPair right, double w_left, double w_right) {
  left = checked(left);
  right = checked(right);
  check_weight(w_left);
  check_weight(w_right);
  const double d = (4.0 - right.u) / 6.0 * w_left * left.d + (4.0 - left.u) / 6.0 * w_right * right.d;
  const double u = 1.5 * w_left * w_right * left.d * right.d - 0.5 * left.u * right.u;
  return checked(DUPair{d, u});
}

std::vector<DUPair> propagate(const WeightedTree& tree, const Cutset& cutset) {
  return propagate_with(tree, cutset, DUPair{1.0, 1.0}, DUPair{kNaN, kNaN},
                        [](DUPair l, DUPair r, double wl, double wr) { return du_step(l, r, wl, wr); });
}

std::vector<AccuracyPair> propagate_ab(const WeightedTree& tree, const Cutset& cutset) {
  return propagate_with(
      tree, cutset, AccuracyPair{1.0, 0.0}, AccuracyPair{kNaN, kNaN},
      [](AccuracyPair l, AccuracyPair r, double wl, double wr) { return ab_step(l, r, wl, wr); });
}

double reconstruction_accuracy(DUPair root) { return 0.5 + 0.5 * checked(root).d; }

double exact_ra(const WeightedTree& tree, const Cutset& cutset) {
  return reconstruction_accuracy(propagate(tree, cutset)[kRoot]);
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kSubThreshold: return "sub-threshold";
    case Regime::kCritical: return "critical";
    case Regime::kSuperThreshold: return "super-threshold";
  }
  return "unknown";
}

FixedPointReport homogeneous_limit(double p, double tol, long max_iters) {
  if (!(p >= 0.0 && p <= 0.5)) throw ValidationError(fmt::format("p = {} outside [0, 1/2]", p));
  if (!(tol > 0.0)) throw ValidationError(fmt::format("tolerance must be positive, got {}", tol));
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");

  FixedPointReport report;
  report.p = p;
  const double w = 1.0 - 2.0 * p;
  report.linear_factor = 4.0 * w / 3.0;
  report.regime = report.linear_factor < 1.0   ? Regime::kSubThreshold
                  : report.linear_factor > 1.0 ? Regime::kSuperThreshold
                                               : Regime::kCritical;

  DUPair x{1.0, 1.0};
  double prev_step = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= max_iters; ++it) {
    const DUPair next = du_step(x, x, w, w);
    const double step = std::max(std::abs(next.d - x.d), std::abs(next.u - x.u));
    x = next;
    report.iterations = it;
    report.last_step = step;
    if (step == 0.0) {
      report.converged = true;
      break;
    }
    if (step < tol) {
      // Remaining distance of a geometric tail with the observed ratio.
      const double ratio = step / prev_step;
      if (ratio < 1.0 && step * ratio / (1.0 - ratio) < tol) {
        report.converged = true;
        break;
      }
    }
    prev_step = step;
  }
  report.limit = x;
  return report;
}

double root_cutset_identity_residual(const WeightedTree& tree, const Cutset& outer,
                                     const Cutset& inner) {
  for (VertexId x : inner.vertices()) {
    if (!outer.in_tree(x)) {
      throw ValidationError(fmt::format("inner cutset vertex {} lies below the outer cutset", x));
    }
  }
  const auto field = propagate(tree, outer);
  double rhs = 0.0;
  for (VertexId x : inner.vertices()) {
    double term = field[x].d;
    for (VertexId z = x; z != kRoot; z = heap::parent(z)) {
      term *= (4.0 - field[heap::sibling(z)].u) / 6.0 * tree.weight(z);
    }
    rhs += term;
  }
  return std::abs(field[kRoot].d - rhs);
}

InvariantReport check_invariants(const WeightedTree& tree, const Cutset& cutset,
                                 const std::vector<DUPair>& field, double slack) {
  InvariantReport report;
  const auto excess = [&](double amount) {
    report.worst_excess = std::max(report.worst_excess, amount);
    return amount > slack;
  };
  for (VertexId v = 0; v < cutset.frame_size(); ++v) {
    if (!cutset.in_tree(v)) continue;
    ++report.vertices_checked;
    const DUPair& du = field.at(v);
    if (excess(-du.d) || excess(du.d - 1.0) || excess(-0.5 - du.u) || excess(du.u - 1.0)) {
      ++report.bound_violations;
    }
    if (cutset.role(v) == Cutset::Role::kInternal) {
      for (VertexId c : {heap::left_child(v), heap::right_child(v)}) {
        if (excess(0.5 * tree.weight(c) * field[c].d - du.d)) ++report.growth_violations;
      }
    }
  }
  return report;
}

}  // namespace parsimony_threshold
