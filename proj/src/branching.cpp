#include "parsimony_threshold/branching.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "parsimony_threshold/errors.hpp"
#include "parsimony_threshold/rng.hpp"

namespace parsimony_threshold {
namespace {

constexpr double kInitialUpper = 2.0;  // weights <= 1 bound the branching number by 2

void check_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ValidationError(fmt::format("kappa must be positive, got {}", kappa));
  }
}

void check_depths(std::span<const int> depths, int depth_bound) {
  if (depths.empty()) throw ValidationError("empty depth schedule");
  int prev = 0;
  for (int d : depths) {
    if (d <= prev) throw ValidationError("depth schedule must be increasing and positive");
    prev = d;
  }
  if (depths.back() > depth_bound) {
    throw RangeError(fmt::format("schedule depth {} exceeds tree depth {}", depths.back(), depth_bound));
  }
}

// Range of D_h(z) in heap order.
struct Descendants {
  VertexId first;
  VertexId count;
};

Descendants descendants(VertexId z, int h) {
  const VertexId width = VertexId{1} << h;
  return {(z + 1) * width - 1, width};
}

}  // namespace

double min_cutset_sum(const WeightedTree& tree, double kappa) {
  return min_cutset_sum(tree, tree.boundary(), kappa);
}

double min_cutset_sum(const WeightedTree& tree, const Cutset& truncation, double kappa,
                      const VertexMask* subtree) {
  check_kappa(kappa);
  tree.require_within(truncation);
  const auto present = [&](VertexId v) {
    return subtree == nullptr || (v < subtree->size() && (*subtree)[v] != 0);
  };
  const VertexId n = truncation.frame_size();
  std::vector<double> f(n, 0.0);
  for (VertexId v = n; v-- > 0;) {
    if (!present(v)) continue;
    switch (truncation.role(v)) {
      case Cutset::Role::kOutside: break;
      case Cutset::Role::kBoundary: f[v] = 1.0; break;
      case Cutset::Role::kInternal: {
        double below = 0.0;
        for (VertexId c : {heap::left_child(v), heap::right_child(v)}) {
          if (present(c)) below += tree.weight(c) / kappa * f[c];
        }
        f[v] = std::min(1.0, below);
        break;
      }
    }
  }
  return present(kRoot) ? f[kRoot] : 0.0;
}

BranchingEstimate estimate_branching_number(const WeightedTree& tree, std::span<const int> depths,
                                            double tol, const VertexMask* subtree) {
  if (!(tol > 0.0)) throw ValidationError(fmt::format("tolerance must be positive, got {}", tol));
  check_depths(depths, tree.depth_bound());

  std::vector<Cutset> truncations;
  truncations.reserve(depths.size());
  for (int d : depths) truncations.push_back(regular_cutset(tree, d));

  BranchingEstimate est;
  const auto sub_critical = [&](double kappa) {
    std::vector<double> values;
    for (std::size_t i = 0; i < depths.size(); ++i) {
      values.push_back(min_cutset_sum(tree, truncations[i], kappa, subtree));
      est.probes.push_back({kappa, depths[i], values.back()});
    }
    const std::size_t k = values.size();
    const double prev_value = k >= 2 ? values[k - 2] : 1.0;
    const int prev_depth = k >= 2 ? depths[k - 2] : 0;
    if (prev_value <= 0.0) return true;  // already extinct
    const double ratio = std::pow(values[k - 1] / prev_value, 1.0 / (depths[k - 1] - prev_depth));
    return ratio < 1.0 - tol / (4.0 * kappa);
  };

  double lo = 0.0;
  double hi = kInitialUpper + tol;
  est.converged = sub_critical(hi);
  while (hi - lo > tol / 4.0) {
    const double mid = 0.5 * (lo + hi);
    (sub_critical(mid) ? hi : lo) = mid;
  }
  // The probe boundary sits tol/4 above the implied critical value.
  est.lo = std::max(0.0, lo - tol / 4.0);
  est.hi = hi - tol / 4.0;
  est.value = 0.5 * (est.lo + est.hi);
  return est;
}

BranchingEstimate estimate_branching_number(const WeightModel& model, std::uint64_t seed,
                                            std::span<const int> depths, double tol,
                                            BuildOptions options) {
  if (depths.empty()) throw ValidationError("empty depth schedule");
  const WeightedTree tree = build_tree(model, depths.back(), seed, options);
  return estimate_branching_number(tree, depths, tol);
}

Theorem1Check theorem1_condition(const WeightModel& model, std::uint64_t seed,
                                 std::span<const int> depths, double tol, BuildOptions options) {
  if (depths.empty()) throw ValidationError("empty depth schedule");
  const WeightedTree tree = build_tree(model, depths.back(), seed, options);
  Theorem1Check check;
  check.estimate = estimate_branching_number(tree, depths, tol);
  check.min_weight = tree.min_weight();
  check.margin = check.estimate.value - 1.5;
  check.conclusive = check.estimate.converged && std::abs(check.margin) > tol;
  check.holds = check.conclusive && check.margin > tol && check.min_weight > 0.0;
  return check;
}

CouplingConstants coupling_constants(double phi_prime, double theta_star) {
  if (!(phi_prime > 0.0 && phi_prime <= 1.0 / 9.0)) {
    throw ValidationError(fmt::format("phi' = {} outside (0, 1/9]", phi_prime));
  }
  if (!(theta_star > 0.0 && theta_star < 1.0)) {
    throw ValidationError(fmt::format("theta* = {} outside (0, 1)", theta_star));
  }
  CouplingConstants c;
  while (std::ldexp(1.0, -((1 << c.H) - 1)) > phi_prime) ++c.H;
  c.eps_prime = std::pow(theta_star / 2.0, c.H + 1) * std::min(std::sqrt(2.0 * phi_prime / 3.0), 0.99);
  return c;
}

bool PercolationSample::reaches_level(int n) const {
  if (n > levels) return false;
  const VertexId first = heap::first_at_level(n);
  for (VertexId v = first; v < first + (VertexId{1} << n); ++v) {
    if (in_subtree(v)) return true;
  }
  return false;
}

PercolationSample percolation_subtree(const WeightedTree& tree, double theta_star, int H) {
  if (!(theta_star > 0.0 && theta_star < 1.0)) {
    throw ValidationError(fmt::format("theta* = {} outside (0, 1)", theta_star));
  }
  if (H < 0) throw ValidationError("H must be non-negative");
  if (tree.depth_bound() < H + 2) {
    throw RangeError(fmt::format("tree depth {} too small for H = {}", tree.depth_bound(), H));
  }
  PercolationSample s;
  s.theta_star = theta_star;
  s.H = H;
  s.levels = tree.depth_bound() - H - 1;

  const VertexId n = tree.boundary().frame_size();
  s.open.assign(n, 0);
  for (VertexId v = 1; v < n; ++v) s.open[v] = tree.contains(v) && tree.weight(v) > theta_star;

  s.member.assign(heap::count_through_level(s.levels), 0);
  s.member[kRoot] = 1;
  for (VertexId z = 1; z < s.member.size(); ++z) {
    if (!s.member[heap::parent(z)]) continue;
    const auto [first, count] = descendants(z, H + 1);
    bool all_open = true;
    for (VertexId w = first; w < first + count && all_open; ++w) {
      all_open = w < n && s.open[w];
    }
    s.member[z] = all_open;
  }
  return s;
}

bool percolation_survives(const WeightModel& model, std::uint64_t seed, double theta_star, int H,
                          int depth) {
  if (!(theta_star > 0.0 && theta_star < 1.0)) {
    throw ValidationError(fmt::format("theta* = {} outside (0, 1)", theta_star));
  }
  if (H < 0 || depth < 0) throw ValidationError("H and depth must be non-negative");
  if (depth + H + 1 > 62) throw ResourceError("percolation depth exceeds 64-bit vertex ids");

  const auto admissible = [&](VertexId z) {
    const auto [first, count] = descendants(z, H + 1);
    for (VertexId w = first; w < first + count; ++w) {
      if (!(model.weight_at(seed, w) > theta_star)) return false;
    }
    return true;
  };
  std::vector<VertexId> stack{kRoot};
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    if (heap::level(x) == depth) return true;
    // Right child pushed first so the left subtree is explored first.
    for (VertexId c : {heap::right_child(x), heap::left_child(x)}) {
      if (admissible(c)) stack.push_back(c);
    }
  }
  return false;
}

double extinction_probability(double q_tilde) {
  if (!(q_tilde >= 0.0 && q_tilde <= 1.0)) {
    throw ValidationError(fmt::format("q~ = {} outside [0, 1]", q_tilde));
  }
  if (q_tilde <= 0.5) return 1.0;
  const double r = (1.0 - q_tilde) / q_tilde;
  return r * r;
}

VertexMask bernoulli_subtree(const WeightedTree& tree, double q_tilde, std::uint64_t seed) {
  if (!(q_tilde >= 0.0 && q_tilde <= 1.0)) {
    throw ValidationError(fmt::format("q~ = {} outside [0, 1]", q_tilde));
  }
  const CounterRng rng(seed);
  const VertexId n = tree.boundary().frame_size();
  VertexMask mask(n, 0);
  mask[kRoot] = 1;
  for (VertexId v = 1; v < n; ++v) {
    mask[v] = tree.contains(v) && mask[heap::parent(v)] &&
              rng.uniform(CounterRng::kThinning, v) < q_tilde;
  }
  return mask;
}

}  // namespace parsimony_threshold
