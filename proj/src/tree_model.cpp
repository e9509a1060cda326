#include "parsimony_threshold/tree_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "parsimony_threshold/errors.hpp"
#include "parsimony_threshold/rng.hpp"

namespace parsimony_threshold {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class PointMass final : public WeightDistribution {
 public:
  explicit PointMass(double w) : w_(w) {}
  double sample(double) const override { return w_; }
  double mean() const override { return w_; }
  double cdf(double x) const override { return x >= w_ ? 1.0 : 0.0; }
  std::string describe() const override { return fmt::format("point:{}", w_); }

 private:
  double w_;
};

class Uniform final : public WeightDistribution {
 public:
  Uniform(double a, double b) : a_(a), b_(b) {}
  // b - u(b - a) lies in (a, b] for u in [0, 1).
  double sample(double u) const override { return b_ - u * (b_ - a_); }
  double mean() const override { return 0.5 * (a_ + b_); }
  double cdf(double x) const override { return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0); }
  std::string describe() const override { return fmt::format("uniform:{}:{}", a_, b_); }

 private:
  double a_;
  double b_;
};

class YuleWeights final : public WeightDistribution {
 public:
  explicit YuleWeights(double rate) : rate_(rate) {}
  // T = -ln(1-u)/rate, so e^{-2T} = (1-u)^{2/rate}.
  double sample(double u) const override { return std::pow(1.0 - u, 2.0 / rate_); }
  double mean() const override { return rate_ / (rate_ + 2.0); }
  double cdf(double x) const override {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return std::pow(x, rate_ / 2.0);
  }
  std::string describe() const override { return fmt::format("yule:{}", rate_); }

 private:
  double rate_;
};

class TwoPoint final : public WeightDistribution {
 public:
  TwoPoint(double a, double b, double prob_a) : a_(a), b_(b), prob_a_(prob_a) {}
  double sample(double u) const override { return u < prob_a_ ? a_ : b_; }
  double mean() const override { return prob_a_ * a_ + (1.0 - prob_a_) * b_; }
  double cdf(double x) const override {
    return (x >= a_ ? prob_a_ : 0.0) + (x >= b_ ? 1.0 - prob_a_ : 0.0);
  }
  std::string describe() const override {
    return fmt::format("two-point:{}:{}:{}", a_, b_, prob_a_);
  }

 private:
  double a_;
  double b_;
  double prob_a_;
};

bool in_weight_support(double w) { return w > 0.0 && w <= 1.0; }

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view text, std::string_view context) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError(fmt::format("bad number '{}' in model '{}'", text, context));
  }
  return value;
}

void check_depth(int depth, int max_depth) {
  if (depth < 0) throw ValidationError(fmt::format("depth must be non-negative, got {}", depth));
  if (depth > max_depth) {
    throw ResourceError(fmt::format("depth {} exceeds the configured cap {}", depth, max_depth));
  }
}

}  // namespace

std::shared_ptr<const WeightDistribution> point_mass(double w) {
  if (!in_weight_support(w)) throw ValidationError(fmt::format("point mass {} outside (0,1]", w));
  return std::make_shared<PointMass>(w);
}

std::shared_ptr<const WeightDistribution> uniform_weights(double a, double b) {
  if (!(a >= 0.0 && a < b && b <= 1.0)) {
    throw ValidationError(fmt::format("uniform({}, {}] not within (0,1]", a, b));
  }
  return std::make_shared<Uniform>(a, b);
}

std::shared_ptr<const WeightDistribution> yule_weights(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ValidationError(fmt::format("Yule rate must be positive, got {}", rate));
  }
  return std::make_shared<YuleWeights>(rate);
}

std::shared_ptr<const WeightDistribution> two_point(double a, double b, double prob_a) {
  if (!in_weight_support(a) || !in_weight_support(b) || !(prob_a >= 0.0 && prob_a <= 1.0)) {
    throw ValidationError(fmt::format("invalid two-point law ({}, {}, {})", a, b, prob_a));
  }
  return std::make_shared<TwoPoint>(a, b, prob_a);
}

WeightModel WeightModel::fixed(double w) {
  if (!in_weight_support(w)) throw ValidationError(fmt::format("fixed weight {} outside (0,1]", w));
  return WeightModel(Kind::kFixed, w, nullptr);
}

WeightModel WeightModel::iid(std::shared_ptr<const WeightDistribution> dist) {
  if (!dist) throw ValidationError("i.i.d. model needs a distribution");
  return WeightModel(Kind::kIid, 0.0, std::move(dist));
}

WeightModel WeightModel::yule(double rate) {
  return WeightModel(Kind::kYule, rate, yule_weights(rate));
}

WeightModel WeightModel::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const auto arity = [&](std::size_t n) {
    if (parts.size() != n) throw ValidationError(fmt::format("malformed model '{}'", text));
  };
  const auto num = [&](std::size_t i) { return parse_number(parts[i], text); };

  if (parts[0] == "fixed") {
    arity(2);
    return fixed(num(1));
  }
  if (parts[0] == "yule") {
    arity(2);
    return yule(num(1));
  }
  if (parts[0] == "iid" && parts.size() >= 2) {
    if (parts[1] == "point") {
      arity(3);
      return iid(point_mass(num(2)));
    }
    if (parts[1] == "uniform") {
      arity(4);
      return iid(uniform_weights(num(2), num(3)));
    }
    if (parts[1] == "yule") {
      arity(3);
      return iid(yule_weights(num(2)));
    }
    if (parts[1] == "two-point") {
      arity(5);
      return iid(two_point(num(2), num(3), num(4)));
    }
  }
  throw ValidationError(fmt::format("unknown model '{}'", text));
}

double WeightModel::weight_at(std::uint64_t seed, VertexId v) const {
  if (kind_ == Kind::kFixed) return param_;
  return dist_->sample(CounterRng(seed).uniform(CounterRng::kWeight, v));
}

double WeightModel::mean() const { return kind_ == Kind::kFixed ? param_ : dist_->mean(); }

double WeightModel::cdf(double x) const {
  if (kind_ == Kind::kFixed) return x >= param_ ? 1.0 : 0.0;
  return dist_->cdf(x);
}

std::string WeightModel::describe() const {
  switch (kind_) {
    case Kind::kFixed: return fmt::format("fixed:{}", param_);
    case Kind::kYule: return fmt::format("yule:{}", param_);
    case Kind::kIid: break;
  }
  return "iid:" + dist_->describe();
}

double mean_weight(const WeightModel& model) { return model.mean(); }

// ---------------------------------------------------------------------------

Cutset::Cutset(std::vector<VertexId> sorted, int max_level)
    : vertices_(std::move(sorted)), max_level_(max_level) {
  roles_.assign(vertices_.back() + 1, static_cast<std::uint8_t>(Role::kOutside));
  for (VertexId v : vertices_) roles_[v] = static_cast<std::uint8_t>(Role::kBoundary);
  for (VertexId v : vertices_) {
    while (v != kRoot) {
      v = heap::parent(v);
      if (roles_[v] == static_cast<std::uint8_t>(Role::kInternal)) break;
      roles_[v] = static_cast<std::uint8_t>(Role::kInternal);
    }
  }
  tree_vertex_count_ = static_cast<std::size_t>(
      std::count_if(roles_.begin(), roles_.end(), [](std::uint8_t r) { return r != 0; }));
}

Cutset Cutset::regular(int n, int max_depth) {
  check_depth(n, max_depth);
  std::vector<VertexId> vs(VertexId{1} << n);
  for (VertexId i = 0; i < vs.size(); ++i) vs[i] = heap::first_at_level(n) + i;
  return Cutset(std::move(vs), n);
}

Cutset Cutset::from_vertices(std::vector<VertexId> vs, int max_depth) {
  if (vs.empty()) throw CoverError("empty set covers nothing");
  std::sort(vs.begin(), vs.end());
  if (std::adjacent_find(vs.begin(), vs.end()) != vs.end()) {
    throw ValidationError("duplicate vertex in cutset");
  }
  const int deepest = heap::level(vs.back());
  check_depth(deepest, max_depth);

  // Antichain check: a member below another member is removable.
  std::vector<std::uint8_t> member(vs.back() + 1, 0);
  for (VertexId v : vs) member[v] = 1;
  for (VertexId v : vs) {
    for (VertexId a = v; a != kRoot;) {
      a = heap::parent(a);
      if (member[a]) {
        throw MinimalityError(
            fmt::format("vertex {} lies below member {}; the set is not minimal", v, a), v);
      }
    }
  }

  // Cover check: every vertex at the deepest level needs a member at or above it.
  const VertexId first = heap::first_at_level(deepest);
  std::vector<std::uint8_t> covered(heap::count_through_level(deepest), 0);
  for (VertexId v = 0; v < covered.size(); ++v) {
    covered[v] = (v < member.size() && member[v]) || (v != kRoot && covered[heap::parent(v)]);
    if (v >= first && !covered[v]) {
      throw CoverError(fmt::format("path through vertex {} avoids the set", v));
    }
  }
  return Cutset(std::move(vs), deepest);
}

// ---------------------------------------------------------------------------

WeightedTree::WeightedTree(std::vector<double> weights, Cutset boundary)
    : weights_(std::move(weights)), boundary_(std::move(boundary)) {
  if (weights_.size() < boundary_.frame_size()) {
    throw ValidationError(fmt::format("{} weight slots for a tree spanning {} ids",
                                      weights_.size(), boundary_.frame_size()));
  }
  weights_.resize(boundary_.frame_size());
  weights_[kRoot] = kNaN;
  for (VertexId v = 1; v < weights_.size(); ++v) {
    if (!boundary_.in_tree(v)) {
      weights_[v] = kNaN;
    } else if (!(weights_[v] >= 0.0 && weights_[v] <= 1.0)) {
      throw ValidationError(fmt::format("weight of vertex {} is {}, outside [0,1]", v, weights_[v]));
    }
  }
}

double WeightedTree::min_weight() const {
  double lo = 1.0;
  for (VertexId v = 1; v < weights_.size(); ++v) {
    if (boundary_.in_tree(v)) lo = std::min(lo, weights_[v]);
  }
  return lo;
}

void WeightedTree::require_within(const Cutset& cutset) const {
  for (VertexId v : cutset.vertices()) {
    if (!contains(v)) {
      throw RangeError(fmt::format("cutset vertex {} lies below the tree boundary", v));
    }
  }
}

WeightedTree build_tree(const WeightModel& model, int depth, std::uint64_t seed,
                        BuildOptions options) {
  check_depth(depth, options.max_depth);
  const VertexId n = heap::count_through_level(depth);
  std::vector<double> weights(n);
  for (VertexId v = 1; v < n; ++v) weights[v] = model.weight_at(seed, v);
  return WeightedTree(std::move(weights), Cutset::regular(depth, options.max_depth));
}

Cutset regular_cutset(const WeightedTree& tree, int n) {
  if (n < 0 || n > tree.depth_bound()) {
    throw RangeError(fmt::format("regular cutset level {} outside [0, {}]", n, tree.depth_bound()));
  }
  Cutset c = Cutset::regular(n, tree.depth_bound());
  tree.require_within(c);
  return c;
}

Cutset validate_cutset(const WeightedTree& tree, std::vector<VertexId> vertices) {
  for (VertexId v : vertices) {
    if (!tree.contains(v)) throw RangeError(fmt::format("vertex {} is not in the tree", v));
  }
  return Cutset::from_vertices(std::move(vertices), tree.depth_bound());
}

}  // namespace parsimony_threshold
