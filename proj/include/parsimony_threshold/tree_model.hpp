#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parsimony_threshold {

// Heap-ordered vertex index: root = 0, children of v are 2v+1 and 2v+2.
using VertexId = std::uint64_t;

inline constexpr VertexId kRoot = 0;

// Default cap on materialized depth (2^26 - 1 vertices).
inline constexpr int kDefaultMaxDepth = 25;

namespace heap {

constexpr VertexId parent(VertexId v) noexcept { return (v - 1) / 2; }
constexpr VertexId left_child(VertexId v) noexcept { return 2 * v + 1; }
constexpr VertexId right_child(VertexId v) noexcept { return 2 * v + 2; }

// Flips the branch bit: odd (left) <-> even (right). Undefined for the root.
constexpr VertexId sibling(VertexId v) noexcept { return v % 2 == 1 ? v + 1 : v - 1; }

// Graph distance from the root.
constexpr int level(VertexId v) noexcept { return static_cast<int>(std::bit_width(v + 1)) - 1; }

constexpr VertexId first_at_level(int n) noexcept { return (VertexId{1} << n) - 1; }
constexpr VertexId count_through_level(int n) noexcept { return (VertexId{1} << (n + 1)) - 1; }

// x <= y in the ancestor order (x is y or an ancestor of y).
constexpr bool is_ancestor_or_self(VertexId x, VertexId y) noexcept {
  const int lx = level(x);
  const int ly = level(y);
  return ly >= lx && ((y + 1) >> (ly - lx)) == x + 1;
}

// Graph distance between two vertices of the complete binary tree.
constexpr int distance(VertexId a, VertexId b) noexcept {
  int la = level(a);
  int lb = level(b);
  int steps = 0;
  while (la > lb) { a = parent(a); --la; ++steps; }
  while (lb > la) { b = parent(b); --lb; ++steps; }
  while (a != b) { a = parent(a); b = parent(b); steps += 2; }
  return steps;
}

}  // namespace heap

// Edge-weight law for i.i.d. models. Draws are made by inverse transform of a
// single uniform, which keeps per-vertex weights a pure function of the RNG
// counter. New laws plug in by subclassing.
class WeightDistribution {
 public:
  virtual ~WeightDistribution() = default;

  // Maps u in [0, 1) to a weight in (0, 1].
  virtual double sample(double u) const = 0;
  virtual double mean() const = 0;
  // P[w <= x].
  virtual double cdf(double x) const = 0;
  // Round-trips through WeightModel::parse after an "iid:" prefix.
  virtual std::string describe() const = 0;
};

std::shared_ptr<const WeightDistribution> point_mass(double w);
// Uniform on (a, b], requires 0 <= a < b <= 1.
std::shared_ptr<const WeightDistribution> uniform_weights(double a, double b);
// e^{-2T} with T ~ Exp(rate).
std::shared_ptr<const WeightDistribution> yule_weights(double rate);
// a with probability prob_a, b otherwise.
std::shared_ptr<const WeightDistribution> two_point(double a, double b, double prob_a);

class WeightModel {
 public:
  enum class Kind { kFixed, kIid, kYule };

  static WeightModel fixed(double w);
  static WeightModel iid(std::shared_ptr<const WeightDistribution> dist);
  static WeightModel yule(double rate);

  // Accepted forms: fixed:W, yule:LAMBDA, iid:point:W, iid:uniform:A:B,
  // iid:yule:LAMBDA, iid:two-point:A:B:PROB_A.
  static WeightModel parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  // Fixed weight or Yule rate; zero for i.i.d. models.
  double parameter() const noexcept { return param_; }
  const WeightDistribution* distribution() const noexcept { return dist_.get(); }

  // Weight of the edge above v for the tree keyed by `seed`.
  double weight_at(std::uint64_t seed, VertexId v) const;
  double mean() const;
  double cdf(double x) const;
  std::string describe() const;

 private:
  WeightModel(Kind kind, double param, std::shared_ptr<const WeightDistribution> dist)
      : kind_(kind), param_(param), dist_(std::move(dist)) {}

  Kind kind_;
  double param_;
  std::shared_ptr<const WeightDistribution> dist_;
};

double mean_weight(const WeightModel& model);

// Minimal vertex set meeting every root-to-infinity path. Besides the members
// it carries the role of every vertex of the truncated tree it induces, which
// is what the bottom-up passes iterate over.
class Cutset {
 public:
  enum class Role : std::uint8_t { kOutside = 0, kInternal = 1, kBoundary = 2 };

  // The 2^n vertices at distance n from the root.
  static Cutset regular(int n, int max_depth = kDefaultMaxDepth);
  // Validates cover and minimality on the infinite complete binary tree.
  static Cutset from_vertices(std::vector<VertexId> vertices, int max_depth = kDefaultMaxDepth);

  std::span<const VertexId> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  int max_level() const noexcept { return max_level_; }

  // One past the largest vertex id of the induced truncated tree.
  VertexId frame_size() const noexcept { return roles_.size(); }

  Role role(VertexId v) const noexcept {
    return v < roles_.size() ? static_cast<Role>(roles_[v]) : Role::kOutside;
  }
  bool contains(VertexId v) const noexcept { return role(v) == Role::kBoundary; }
  bool in_tree(VertexId v) const noexcept { return role(v) != Role::kOutside; }
  std::size_t tree_vertex_count() const noexcept { return tree_vertex_count_; }

  friend bool operator==(const Cutset& a, const Cutset& b) { return a.vertices_ == b.vertices_; }

 private:
  Cutset(std::vector<VertexId> sorted, int max_level);

  std::vector<VertexId> vertices_;
  std::vector<std::uint8_t> roles_;
  int max_level_ = 0;
  std::size_t tree_vertex_count_ = 0;
};

// Complete binary tree truncated at a boundary cutset, with a weight in [0,1]
// on the edge above every non-root vertex. Weights live in a flat array
// indexed by VertexId; slots of absent vertices and the root hold NaN.
class WeightedTree {
 public:
  WeightedTree(std::vector<double> weights, Cutset boundary);

  int depth_bound() const noexcept { return boundary_.max_level(); }
  const Cutset& boundary() const noexcept { return boundary_; }
  bool contains(VertexId v) const noexcept { return boundary_.in_tree(v); }

  double weight(VertexId v) const noexcept { return weights_[v]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t vertex_count() const noexcept { return boundary_.tree_vertex_count(); }

  // Smallest edge weight over the tree (1 for the single-vertex tree).
  double min_weight() const;

  // Throws RangeError unless every member of `cutset` lies on or above the
  // boundary.
  void require_within(const Cutset& cutset) const;

 private:
  std::vector<double> weights_;
  Cutset boundary_;
};

struct BuildOptions {
  int max_depth = kDefaultMaxDepth;
};

// Complete tree truncated at the regular cutset of the given depth. Random
// weights are keyed on (seed, vertex id).
WeightedTree build_tree(const WeightModel& model, int depth, std::uint64_t seed,
                        BuildOptions options = {});

Cutset regular_cutset(const WeightedTree& tree, int n);

// Throws CoverError or MinimalityError when the set is not a cutset of the
// tree, RangeError when a vertex lies below the tree's boundary.
Cutset validate_cutset(const WeightedTree& tree, std::vector<VertexId> vertices);

}  // namespace parsimony_threshold
