#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "parsimony_threshold/tree_model.hpp"

namespace parsimony_threshold {

// Worker count: `requested` if positive, else $PARSIMONY_THREADS, else the
// hardware concurrency.
int resolve_threads(int requested = 0);

// Sums body(i) over i in [0, count) on `threads` workers. Integer reduction
// keeps the result independent of scheduling.
std::int64_t parallel_count(std::int64_t count, int threads,
                            const std::function<std::int64_t(std::int64_t)>& body);

struct CutsetSpec {
  enum class Kind { kRegular, kExplicit, kFile };
  Kind kind = Kind::kRegular;
  int level = 0;
  std::vector<VertexId> vertices;
  std::string path;

  // regular:N, list:ID,ID,...  or file:PATH (a tree JSON document).
  static CutsetSpec parse(std::string_view text);
};

enum class OutputFormat { kCsv, kJson };

struct ExperimentConfig {
  WeightModel model = WeightModel::fixed(1.0);
  CutsetSpec cutset;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::string output_path;  // empty = stdout
  OutputFormat format = OutputFormat::kJson;
  int threads = 0;
  int max_depth = kDefaultMaxDepth;

  // Keys: model, cutset, trials, seed, output {path, format}, threads,
  // max_depth. Missing keys keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  void validate() const;
};

// Tree and observation cutset implied by a config. A file cutset supplies its
// own weights; otherwise the tree is built from the model at the cutset's
// depth with the config seed.
struct ResolvedExperiment {
  WeightedTree tree;
  Cutset cutset;
};
ResolvedExperiment resolve(const ExperimentConfig& config);

struct RaEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
};

// End-to-end trials: sample CF states, run Fitch, break root ties with a
// coin, compare with the true root. Trial t draws from
// CounterRng::for_trial(seed, t).
RaEstimate mc_estimate_ra(const WeightedTree& tree, const Cutset& cutset, std::int64_t trials,
                          std::uint64_t seed, int threads = 0);
RaEstimate mc_estimate_ra(const ExperimentConfig& config);

// Per-trial boundary states, one (trial, vertex, state) row per cutset vertex.
void dump_boundary_patterns(const WeightedTree& tree, const Cutset& cutset, std::int64_t trials,
                            std::uint64_t seed, std::ostream& out);

inline constexpr std::size_t kBruteForceMaxCutset = 20;

// Exact accuracy by enumerating both root states and every cutset pattern.
// Pattern probabilities come from the pruning (likelihood) recursion and the
// root call from deterministic Fitch with 1/2 credit for {0,1}.
double brute_force_ra(const WeightedTree& tree, const Cutset& cutset);

enum class SweepKind { kFixedP, kYuleLambda };

struct SweepRow {
  SweepKind kind;
  double parameter;
  int depth;
  double d_root;   // fixed: exact; Yule: mean over sampled trees
  double ra_exact; // 1/2 + d_root/2
  double ra_median;
  double ra_mc;    // NaN when no trials were requested
  double mc_stderr;
  std::vector<double> tree_ra;  // per sampled tree (Yule only)
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  int tree_samples = 200;
  int threads = 0;
  int max_depth = kDefaultMaxDepth;
};

// fixed_p: weights 1 - 2p on the regular cutset of each depth. yule_lambda:
// `tree_samples` Yule trees, exact accuracy per tree, plus an annealed Monte
// Carlo estimate cycling through the trees.
SweepResult sweep_threshold(SweepKind kind, std::span<const double> grid, std::span<const int> depths,
                            const SweepOptions& options);

std::string to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view text);

inline constexpr std::string_view kCsvSchemaLine = "# parsimony-threshold v1";

void write_sweep_csv(const SweepResult& result, std::ostream& out);

// 17 significant digits ("%.17g"); reads back bit-exact.
std::string format_double(double x);

}  // namespace parsimony_threshold
