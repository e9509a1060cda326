#include "parsimony_threshold/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "parsimony_threshold/cf_simulator.hpp"
#include "parsimony_threshold/errors.hpp"
#include "parsimony_threshold/parsimony.hpp"
#include "parsimony_threshold/recurrence.hpp"
#include "parsimony_threshold/rng.hpp"
#include "parsimony_threshold/tree_io.hpp"

namespace parsimony_threshold {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T parse_integer(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError(fmt::format("bad {} '{}'", what, text));
  }
  return value;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

RaEstimate summarize(std::int64_t successes, std::int64_t trials) {
  RaEstimate r;
  r.successes = successes;
  r.trials = trials;
  r.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  r.stderr_ = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(trials));
  return r;
}

// One end-to-end trial on a prepared tree; 1 on a correct root call.
std::int64_t run_trial(const WeightedTree& tree, const Cutset& cutset, CounterRng rng,
                       StateAssignment& scratch) {
  sample_states_into(tree, cutset, rng, scratch);
  const FitchSet root = fitch_bottom_up(tree, cutset, scratch).root();
  return mp_root_estimate(root, rng) == scratch.get(kRoot) ? 1 : 0;
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PARSIMONY_THREADS"); env != nullptr && *env != '\0') {
    const int n = parse_integer<int>(env, "PARSIMONY_THREADS");
    if (n < 1) throw ValidationError("PARSIMONY_THREADS must be positive");
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::int64_t parallel_count(std::int64_t count, int threads,
                            const std::function<std::int64_t(std::int64_t)>& body) {
  const std::int64_t workers = std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(count, 1));
  if (workers == 1) {
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < count; ++i) total += body(i);
    return total;
  }
  std::vector<std::int64_t> partial(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::int64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::int64_t begin = count * w / workers;
          const std::int64_t end = count * (w + 1) / workers;
          for (std::int64_t i = begin; i < end; ++i) partial[w] += body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::int64_t total = 0;
  for (std::int64_t p : partial) total += p;
  return total;
}

CutsetSpec CutsetSpec::parse(std::string_view text) {
  CutsetSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ValidationError(fmt::format("bad cutset '{}'", text));
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind == "regular") {
    spec.kind = Kind::kRegular;
    spec.level = parse_integer<int>(rest, "cutset level");
  } else if (kind == "list") {
    spec.kind = Kind::kExplicit;
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      spec.vertices.push_back(parse_integer<VertexId>(rest.substr(start, comma - start), "vertex id"));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else if (kind == "file") {
    spec.kind = Kind::kFile;
    spec.path = std::string(rest);
  } else {
    throw ValidationError(fmt::format("unknown cutset kind '{}'", kind));
  }
  return spec;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  try {
    if (doc.contains("model")) c.model = WeightModel::parse(doc["model"].get<std::string>());
    if (doc.contains("cutset")) {
      const auto& cut = doc["cutset"];
      if (cut.is_string()) {
        c.cutset = CutsetSpec::parse(cut.get<std::string>());
      } else if (cut.is_array()) {
        c.cutset.kind = CutsetSpec::Kind::kExplicit;
        c.cutset.vertices = cut.get<std::vector<VertexId>>();
      } else if (cut.is_object() && cut.contains("file")) {
        c.cutset.kind = CutsetSpec::Kind::kFile;
        c.cutset.path = cut["file"].get<std::string>();
      } else {
        throw ValidationError("cutset must be a string, an id array or {\"file\": path}");
      }
    }
    if (doc.contains("trials")) c.trials = doc["trials"].get<std::int64_t>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("threads")) c.threads = doc["threads"].get<int>();
    if (doc.contains("max_depth")) c.max_depth = doc["max_depth"].get<int>();
    if (doc.contains("output")) {
      const auto& out = doc["output"];
      if (out.contains("path")) c.output_path = out["path"].get<std::string>();
      if (out.contains("format")) {
        const auto fmt_name = out["format"].get<std::string>();
        if (fmt_name == "csv") {
          c.format = OutputFormat::kCsv;
        } else if (fmt_name == "json") {
          c.format = OutputFormat::kJson;
        } else {
          throw ValidationError(fmt::format("unknown output format '{}'", fmt_name));
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("config: {}", e.what()));
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ValidationError(fmt::format("trials must be at least 1, got {}", trials));
  if (threads < 0) throw ValidationError("threads must be non-negative");
  if (cutset.kind == CutsetSpec::Kind::kRegular && cutset.level < 0) {
    throw ValidationError("regular cutset level must be non-negative");
  }
}

ResolvedExperiment resolve(const ExperimentConfig& config) {
  config.validate();
  switch (config.cutset.kind) {
    case CutsetSpec::Kind::kRegular: {
      WeightedTree tree = build_tree(config.model, config.cutset.level, config.seed, {config.max_depth});
      Cutset cut = regular_cutset(tree, config.cutset.level);
      return {std::move(tree), std::move(cut)};
    }
    case CutsetSpec::Kind::kExplicit: {
      const Cutset shape = Cutset::from_vertices(config.cutset.vertices, config.max_depth);
      WeightedTree tree = build_tree(config.model, shape.max_level(), config.seed, {config.max_depth});
      Cutset cut = validate_cutset(tree, config.cutset.vertices);
      return {std::move(tree), std::move(cut)};
    }
    case CutsetSpec::Kind::kFile: {
      WeightedTree tree = read_tree_file(config.cutset.path, config.max_depth);
      Cutset cut = tree.boundary();
      return {std::move(tree), std::move(cut)};
    }
  }
  throw ValidationError("unknown cutset kind");
}

RaEstimate mc_estimate_ra(const WeightedTree& tree, const Cutset& cutset, std::int64_t trials,
                          std::uint64_t seed, int threads) {
  if (trials < 1) throw ValidationError(fmt::format("trials must be at least 1, got {}", trials));
  tree.require_within(cutset);
  const int workers = resolve_threads(threads);
  // One scratch buffer per worker would need worker ids; a thread_local keeps
  // the body a pure function of the trial index.
  const auto successes = parallel_count(trials, workers, [&](std::int64_t t) {
    thread_local StateAssignment scratch;
    return run_trial(tree, cutset, CounterRng::for_trial(seed, static_cast<std::uint64_t>(t)), scratch);
  });
  return summarize(successes, trials);
}

RaEstimate mc_estimate_ra(const ExperimentConfig& config) {
  const auto [tree, cutset] = resolve(config);
  return mc_estimate_ra(tree, cutset, config.trials, config.seed, config.threads);
}

void dump_boundary_patterns(const WeightedTree& tree, const Cutset& cutset, std::int64_t trials,
                            std::uint64_t seed, std::ostream& out) {
  out << kCsvSchemaLine << '\n' << "trial,vertex,state\n";
  StateAssignment states;
  for (std::int64_t t = 0; t < trials; ++t) {
    sample_states_into(tree, cutset, CounterRng::for_trial(seed, static_cast<std::uint64_t>(t)), states);
    for (VertexId v : cutset.vertices()) out << t << ',' << v << ',' << states.get(v) << '\n';
  }
}

double brute_force_ra(const WeightedTree& tree, const Cutset& cutset) {
  tree.require_within(cutset);
  const std::size_t k = cutset.size();
  if (k > kBruteForceMaxCutset) {
    throw ResourceError(fmt::format("brute force over {} cutset vertices exceeds the cap of {}", k,
                                    kBruteForceMaxCutset));
  }
  const auto members = cutset.vertices();
  std::vector<VertexId> internal;  // children before parents
  for (VertexId v = cutset.frame_size(); v-- > 0;) {
    if (cutset.role(v) == Cutset::Role::kInternal) internal.push_back(v);
  }

  const VertexId n = cutset.frame_size();
  std::vector<double> like0(n);
  std::vector<double> like1(n);
  std::vector<FitchSet> sets(n);
  double ra = 0.0;
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << k); ++pattern) {
    for (std::size_t i = 0; i < k; ++i) {
      const int s = static_cast<int>((pattern >> i) & 1);
      like0[members[i]] = s == 0 ? 1.0 : 0.0;
      like1[members[i]] = s == 1 ? 1.0 : 0.0;
      sets[members[i]] = singleton(s);
    }
    for (VertexId v : internal) {
      double l0 = 1.0;
      double l1 = 1.0;
      for (VertexId c : {heap::left_child(v), heap::right_child(v)}) {
        const double p = 0.5 * (1.0 - tree.weight(c));
        const double q = 1.0 - p;
        l0 *= q * like0[c] + p * like1[c];
        l1 *= p * like0[c] + q * like1[c];
      }
      like0[v] = l0;
      like1[v] = l1;
      bool was_union = false;
      sets[v] = fitch_merge(sets[heap::left_child(v)], sets[heap::right_child(v)], was_union);
    }
    const auto credit = [&](int s) {
      if (sets[kRoot] == FitchSet::kBoth) return 0.5;
      return sets[kRoot] == singleton(s) ? 1.0 : 0.0;
    };
    ra += 0.5 * (like0[kRoot] * credit(0) + like1[kRoot] * credit(1));
  }
  return ra;
}

std::string to_string(SweepKind kind) {
  return kind == SweepKind::kFixedP ? "fixed_p" : "yule_lambda";
}

SweepKind parse_sweep_kind(std::string_view text) {
  if (text == "fixed_p") return SweepKind::kFixedP;
  if (text == "yule_lambda") return SweepKind::kYuleLambda;
  throw ValidationError(fmt::format("unknown sweep kind '{}'", text));
}

SweepResult sweep_threshold(SweepKind kind, std::span<const double> grid, std::span<const int> depths,
                            const SweepOptions& options) {
  if (grid.empty() || depths.empty()) throw ValidationError("sweep needs a grid and depths");
  if (options.trials < 0) throw ValidationError("trials must be non-negative");
  for (int d : depths) {
    if (d < 0) throw ValidationError("depths must be non-negative");
  }
  const int max_depth = *std::max_element(depths.begin(), depths.end());
  const int threads = resolve_threads(options.threads);

  SweepResult result;
  for (double x : grid) {
    if (kind == SweepKind::kFixedP) {
      if (!(x >= 0.0 && x < 0.5)) throw RangeError(fmt::format("p = {} outside [0, 1/2)", x));
      const WeightedTree tree =
          build_tree(WeightModel::fixed(1.0 - 2.0 * x), max_depth, options.seed, {options.max_depth});
      for (int depth : depths) {
        const Cutset cut = regular_cutset(tree, depth);
        SweepRow row{kind, x, depth, 0.0, 0.0, 0.0, kNaN, kNaN, {}};
        row.d_root = propagate(tree, cut)[kRoot].d;
        row.ra_exact = 0.5 + 0.5 * row.d_root;
        row.ra_median = row.ra_exact;
        if (options.trials > 0) {
          const RaEstimate mc = mc_estimate_ra(tree, cut, options.trials, options.seed, threads);
          row.ra_mc = mc.estimate;
          row.mc_stderr = mc.stderr_;
        }
        result.rows.push_back(std::move(row));
      }
      continue;
    }

    if (!(x > 0.0)) throw RangeError(fmt::format("lambda = {} must be positive", x));
    if (options.tree_samples < 1) throw ValidationError("tree_samples must be at least 1");
    const WeightModel model = WeightModel::yule(x);
    std::vector<WeightedTree> trees;
    trees.reserve(options.tree_samples);
    for (int i = 0; i < options.tree_samples; ++i) {
      const std::uint64_t tree_seed = CounterRng::for_trial(options.seed, static_cast<std::uint64_t>(i)).key();
      trees.push_back(build_tree(model, max_depth, tree_seed, {options.max_depth}));
    }
    for (int depth : depths) {
      const Cutset cut = Cutset::regular(depth, options.max_depth);
      SweepRow row{kind, x, depth, 0.0, 0.0, 0.0, kNaN, kNaN, {}};
      double d_sum = 0.0;
      for (const auto& tree : trees) {
        const double d = propagate(tree, cut)[kRoot].d;
        d_sum += d;
        row.tree_ra.push_back(0.5 + 0.5 * d);
      }
      row.d_root = d_sum / static_cast<double>(trees.size());
      row.ra_exact = 0.5 + 0.5 * row.d_root;
      row.ra_median = median(row.tree_ra);
      if (options.trials > 0) {
        const auto successes = parallel_count(options.trials, threads, [&](std::int64_t t) {
          thread_local StateAssignment scratch;
          const auto& tree = trees[static_cast<std::size_t>(t) % trees.size()];
          return run_trial(tree, cut, CounterRng::for_trial(options.seed ^ 0xa5a5a5a5ULL, static_cast<std::uint64_t>(t)),
                           scratch);
        });
        const RaEstimate mc = summarize(successes, options.trials);
        row.ra_mc = mc.estimate;
        row.mc_stderr = mc.stderr_;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.17g}", x);
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << kCsvSchemaLine << '\n'
      << "kind,parameter,depth,d_root,ra_exact,ra_median,ra_mc,mc_stderr,tree_samples\n";
  for (const auto& r : result.rows) {
    out << to_string(r.kind) << ',' << format_double(r.parameter) << ',' << r.depth << ','
        << format_double(r.d_root) << ',' << format_double(r.ra_exact) << ','
        << format_double(r.ra_median) << ',' << format_double(r.ra_mc) << ','
        << format_double(r.mc_stderr) << ',' << (r.kind == SweepKind::kFixedP ? 0 : r.tree_ra.size())
        << '\n';
  }
}

}  // namespace parsimony_threshold
