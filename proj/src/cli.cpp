#include "parsimony_threshold/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "parsimony_threshold/branching.hpp"
#include "parsimony_threshold/errors.hpp"
#include "parsimony_threshold/harness.hpp"
#include "parsimony_threshold/recurrence.hpp"
#include "parsimony_threshold/rng.hpp"
#include "parsimony_threshold/tree_io.hpp"

namespace parsimony_threshold {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::stringstream cell(item);
    T v{};
    if (!(cell >> v) || !(cell >> std::ws).eof()) {
      throw ValidationError(fmt::format("bad {} entry '{}'", what, item));
    }
    values.push_back(v);
  }
  if (values.empty()) throw ValidationError(fmt::format("empty {} list", what));
  return values;
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw ValidationError(fmt::format("unknown format '{}'", name));
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

// Flags shared by the experiment-style subcommands.
struct ExperimentFlags {
  std::string model = "fixed:1";
  std::string cutset = "regular:3";
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  std::string config;
  std::string tree_file;
  int max_depth = kDefaultMaxDepth;

  CLI::Option* model_opt = nullptr;
  CLI::Option* cutset_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App& app, bool with_trials) {
    model_opt = app.add_option("--model", model, "fixed:W | yule:L | iid:point:W | iid:uniform:A:B | "
                                                  "iid:yule:L | iid:two-point:A:B:P");
    cutset_opt = app.add_option("--cutset", cutset, "regular:N | list:ID,ID,... | file:PATH");
    if (with_trials) trials_opt = app.add_option("--trials", trials, "Monte Carlo trials");
    seed_opt = app.add_option("--seed", seed, "Seed for tree weights and trials");
    app.add_option("--config", config, "Experiment config (JSON)");
    app.add_option("--tree", tree_file, "Tree JSON file (weights + boundary cutset)");
    app.add_option("--max-depth", max_depth, "Cap on materialized depth");
  }

  ExperimentConfig to_config(int threads) const {
    ExperimentConfig c;
    if (!config.empty()) c = ExperimentConfig::from_json(read_json_file(config));
    if (config.empty() || model_opt->count() > 0) c.model = WeightModel::parse(model);
    if (config.empty() || cutset_opt->count() > 0) c.cutset = CutsetSpec::parse(cutset);
    if (trials_opt != nullptr && (config.empty() || trials_opt->count() > 0)) c.trials = trials;
    if (config.empty() || seed_opt->count() > 0) c.seed = seed;
    if (threads > 0) c.threads = threads;
    c.max_depth = max_depth;
    c.validate();
    return c;
  }

  // A --tree file replaces the model; the cutset defaults to its boundary.
  ResolvedExperiment resolve_experiment(const ExperimentConfig& c) const {
    if (tree_file.empty()) return resolve(c);
    WeightedTree tree = read_tree_file(tree_file, max_depth);
    if (cutset_opt->count() == 0) {
      Cutset cut = tree.boundary();
      return {std::move(tree), std::move(cut)};
    }
    const CutsetSpec spec = CutsetSpec::parse(cutset);
    if (spec.kind == CutsetSpec::Kind::kRegular) {
      Cutset cut = regular_cutset(tree, spec.level);
      return {std::move(tree), std::move(cut)};
    }
    if (spec.kind == CutsetSpec::Kind::kExplicit) {
      Cutset cut = validate_cutset(tree, spec.vertices);
      return {std::move(tree), std::move(cut)};
    }
    throw ValidationError("--tree cannot be combined with a file cutset");
  }

  std::string model_label() const { return tree_file.empty() ? model : "file:" + tree_file; }
};

std::string csv_header(std::string_view columns) {
  return fmt::format("{}\n{}\n", kCsvSchemaLine, columns);
}

std::string cmd_simulate(const ExperimentFlags& flags, OutputFormat format, int threads,
                         const std::string& dump_path) {
  const ExperimentConfig config = flags.to_config(threads);
  const auto [tree, cutset] = flags.resolve_experiment(config);
  const RaEstimate mc = mc_estimate_ra(tree, cutset, config.trials, config.seed, config.threads);
  const double exact = exact_ra(tree, cutset);
  if (!dump_path.empty()) {
    std::ofstream dump(dump_path);
    if (!dump) throw ValidationError(fmt::format("cannot write '{}'", dump_path));
    dump_boundary_patterns(tree, cutset, config.trials, config.seed, dump);
  }
  const std::string model = flags.tree_file.empty() ? config.model.describe() : flags.model_label();
  if (format == OutputFormat::kCsv) {
    return csv_header("model,cutset_size,trials,seed,ra_mc,stderr,ra_exact") +
           fmt::format("{},{},{},{},{},{},{}\n", model, cutset.size(), config.trials, config.seed,
                       format_double(mc.estimate), format_double(mc.stderr_), format_double(exact));
  }
  Json j;
  j["command"] = "simulate";
  j["model"] = model;
  j["cutset_size"] = cutset.size();
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["successes"] = mc.successes;
  j["ra_mc"] = mc.estimate;
  j["stderr"] = mc.stderr_;
  j["ra_exact"] = exact;
  return j.dump(2) + "\n";
}

std::string cmd_exact_ra(const ExperimentFlags& flags, OutputFormat format, bool dump_du) {
  const ExperimentConfig config = flags.to_config(0);
  const auto [tree, cutset] = flags.resolve_experiment(config);
  const auto field = propagate(tree, cutset);
  const DUPair root = field[kRoot];
  const double ra = reconstruction_accuracy(root);
  const InvariantReport inv = check_invariants(tree, cutset, field);
  const std::string model = flags.tree_file.empty() ? config.model.describe() : flags.model_label();
  if (format == OutputFormat::kCsv) {
    std::string out = csv_header("model,cutset_size,d_root,u_root,ra");
    out += fmt::format("{},{},{},{},{}\n", model, cutset.size(), format_double(root.d),
                       format_double(root.u), format_double(ra));
    if (dump_du) {
      out += "vertex,d,u\n";
      for (VertexId v = 0; v < cutset.frame_size(); ++v) {
        if (cutset.in_tree(v)) {
          out += fmt::format("{},{},{}\n", v, format_double(field[v].d), format_double(field[v].u));
        }
      }
    }
    return out;
  }
  Json j;
  j["command"] = "exact-ra";
  j["model"] = model;
  j["cutset_size"] = cutset.size();
  j["d_root"] = root.d;
  j["u_root"] = root.u;
  j["ra"] = ra;
  j["bound_violations"] = inv.bound_violations;
  j["growth_violations"] = inv.growth_violations;
  if (dump_du) {
    Json rows = Json::array();
    for (VertexId v = 0; v < cutset.frame_size(); ++v) {
      if (cutset.in_tree(v)) rows.push_back({{"vertex", v}, {"d", field[v].d}, {"u", field[v].u}});
    }
    j["vertices"] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

std::string cmd_fixed_point(double p, double tol, long max_iters, OutputFormat format) {
  const FixedPointReport r = homogeneous_limit(p, tol, max_iters);
  if (format == OutputFormat::kCsv) {
    return csv_header("p,d,u,iterations,converged,regime,linear_factor") +
           fmt::format("{},{},{},{},{},{},{}\n", format_double(p), format_double(r.limit.d),
                       format_double(r.limit.u), r.iterations, r.converged ? 1 : 0,
                       to_string(r.regime), format_double(r.linear_factor));
  }
  Json j;
  j["command"] = "fixed-point";
  j["p"] = p;
  j["d"] = r.limit.d;
  j["u"] = r.limit.u;
  j["ra"] = 0.5 + 0.5 * r.limit.d;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["regime"] = to_string(r.regime);
  j["linear_factor"] = r.linear_factor;
  return j.dump(2) + "\n";
}

std::string cmd_branching(const std::string& model_text, const std::string& depths_text, double tol,
                          std::uint64_t seed, int max_depth, OutputFormat format) {
  const WeightModel model = WeightModel::parse(model_text);
  const auto depths = parse_list<int>(depths_text, "depth");
  const Theorem1Check check = theorem1_condition(model, seed, depths, tol, {max_depth});
  const BranchingEstimate& est = check.estimate;
  if (format == OutputFormat::kCsv) {
    std::string out = csv_header("kappa,depth,min_cutset_sum");
    for (const auto& p : est.probes) {
      out += fmt::format("{},{},{}\n", format_double(p.kappa), p.depth, format_double(p.value));
    }
    return out;
  }
  Json j;
  j["command"] = "branching";
  j["model"] = model.describe();
  j["depths"] = depths;
  j["tol"] = tol;
  j["estimate"] = est.value;
  j["lo"] = est.lo;
  j["hi"] = est.hi;
  j["converged"] = est.converged;
  j["summary"] = fmt::format("{:.2f} +/- {}", est.value, tol);
  j["theorem1"] = {{"holds", check.holds},
                   {"conclusive", check.conclusive},
                   {"margin", check.margin},
                   {"min_weight", check.min_weight}};
  return j.dump(2) + "\n";
}

struct PercolationFlags {
  std::string model = "iid:uniform:0:1";
  std::optional<double> theta_star;
  std::optional<double> q_tilde;
  std::optional<double> phi_prime;
  std::optional<int> H;
  int depth = 20;
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
};

std::string cmd_percolation(const PercolationFlags& f, OutputFormat format, int threads) {
  const WeightModel model = WeightModel::parse(f.model);
  int H = f.H.value_or(0);
  std::optional<CouplingConstants> coupling;
  if (f.phi_prime) {
    if (!f.theta_star) throw ValidationError("--phi-prime needs --theta-star");
    coupling = coupling_constants(*f.phi_prime, *f.theta_star);
    if (!f.H) H = coupling->H;
  }
  if (H < 0) throw ValidationError("--H must be non-negative");
  const double blocks = std::ldexp(1.0, H + 1);
  double theta = 0.0;
  if (f.q_tilde) {
    if (f.theta_star) throw ValidationError("give either --theta-star or --q-tilde");
    if (f.model != "iid:uniform:0:1") throw ValidationError("--q-tilde assumes the iid:uniform:0:1 model");
    if (!(*f.q_tilde > 0.0 && *f.q_tilde < 1.0)) throw ValidationError("--q-tilde must lie in (0,1)");
    theta = 1.0 - std::pow(*f.q_tilde, 1.0 / blocks);
  } else if (f.theta_star) {
    theta = *f.theta_star;
  } else {
    throw ValidationError("percolation needs --theta-star or --q-tilde");
  }
  if (f.trials < 1) throw ValidationError("trials must be at least 1");
  const double tau = model.cdf(theta);
  const double q_tilde = std::pow(1.0 - tau, blocks);
  const double formula = extinction_probability(q_tilde);

  std::vector<std::uint8_t> survived(static_cast<std::size_t>(f.trials), 0);
  const auto survivors = parallel_count(f.trials, resolve_threads(threads), [&](std::int64_t t) {
    const std::uint64_t tree_seed = CounterRng::for_trial(f.seed, static_cast<std::uint64_t>(t)).key();
    const bool s = percolation_survives(model, tree_seed, theta, H, f.depth);
    survived[static_cast<std::size_t>(t)] = s ? 1 : 0;
    return static_cast<std::int64_t>(s);
  });
  if (format == OutputFormat::kCsv) {
    std::string out = csv_header("trial,survived");
    for (std::size_t t = 0; t < survived.size(); ++t) out += fmt::format("{},{}\n", t, survived[t]);
    return out;
  }
  const double extinct = static_cast<double>(f.trials - survivors) / static_cast<double>(f.trials);
  Json j;
  j["command"] = "percolation";
  j["model"] = model.describe();
  j["theta_star"] = theta;
  j["H"] = H;
  if (coupling) j["eps_prime"] = coupling->eps_prime;
  j["tau"] = tau;
  j["q_tilde"] = q_tilde;
  j["depth"] = f.depth;
  j["trials"] = f.trials;
  j["extinction_empirical"] = extinct;
  j["stderr"] = std::sqrt(extinct * (1.0 - extinct) / static_cast<double>(f.trials));
  j["extinction_formula"] = formula;
  return j.dump(2) + "\n";
}

std::string cmd_sweep(const std::string& kind, const std::string& grid_text, const std::string& depths_text,
                      const SweepOptions& options, OutputFormat format) {
  const auto grid = parse_list<double>(grid_text, "grid");
  const auto depths = parse_list<int>(depths_text, "depth");
  const SweepResult result = sweep_threshold(parse_sweep_kind(kind), grid, depths, options);
  if (format == OutputFormat::kCsv) {
    std::ostringstream out;
    write_sweep_csv(result, out);
    return out.str();
  }
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"kind", to_string(r.kind)},
                    {"parameter", r.parameter},
                    {"depth", r.depth},
                    {"d_root", r.d_root},
                    {"ra_exact", r.ra_exact},
                    {"ra_median", r.ra_median},
                    {"ra_mc", r.ra_mc},
                    {"mc_stderr", r.mc_stderr},
                    {"tree_samples", r.tree_ra.size()}});
  }
  Json j;
  j["command"] = "sweep";
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string cmd_oracle_check(const ExperimentFlags& flags, OutputFormat format, bool& agreed) {
  const ExperimentConfig config = flags.to_config(0);
  const auto [tree, cutset] = flags.resolve_experiment(config);
  const double brute = brute_force_ra(tree, cutset);
  const double recurrence = exact_ra(tree, cutset);
  const double diff = std::abs(brute - recurrence);

  // Coordinate change between the two propagations, and the root identity
  // over every regular cutset above the observation cutset.
  const auto du = propagate(tree, cutset);
  const auto ab = propagate_ab(tree, cutset);
  double coord_diff = 0.0;
  for (VertexId v = 0; v < cutset.frame_size(); ++v) {
    if (!cutset.in_tree(v)) continue;
    const DUPair converted = to_du(ab[v]);
    coord_diff = std::max({coord_diff, std::abs(converted.d - du[v].d), std::abs(converted.u - du[v].u)});
  }
  int shallowest = cutset.max_level();
  for (VertexId v : cutset.vertices()) shallowest = std::min(shallowest, heap::level(v));
  double residual = root_cutset_identity_residual(tree, cutset, cutset);
  for (int k = 0; k <= shallowest; ++k) {
    residual = std::max(residual, root_cutset_identity_residual(tree, cutset, Cutset::regular(k)));
  }
  agreed = diff <= 1e-12 && coord_diff <= 1e-12 && residual <= 1e-10;

  const std::string model = flags.tree_file.empty() ? config.model.describe() : flags.model_label();
  if (format == OutputFormat::kCsv) {
    return csv_header("model,cutset_size,brute_force,recurrence,abs_diff,coordinate_diff,identity_residual,agree") +
           fmt::format("{},{},{},{},{},{},{},{}\n", model, cutset.size(), format_double(brute),
                       format_double(recurrence), format_double(diff), format_double(coord_diff),
                       format_double(residual), agreed ? 1 : 0);
  }
  Json j;
  j["command"] = "oracle-check";
  j["model"] = model;
  j["cutset_size"] = cutset.size();
  j["brute_force"] = brute;
  j["recurrence"] = recurrence;
  j["abs_diff"] = diff;
  j["coordinate_diff"] = coord_diff;
  j["identity_residual"] = residual;
  j["agree"] = agreed;
  return j.dump(2) + "\n";
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError(fmt::format("cannot write '{}'", path));
  file << text;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum-parsimony reconstruction thresholds on weighted binary trees",
               "parsimony-threshold"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  int threads = 0;
  std::string output;
  std::string format_name;
  app.add_option("--threads", threads, "Worker threads (default: $PARSIMONY_THREADS or all cores)");

  const auto common = [&](CLI::App* sub, const char* default_format) {
    sub->add_option("--output,-o", output, "Write to this file instead of stdout");
    sub->add_option("--format", format_name, "csv | json")->default_str(default_format);
    sub->add_option("--threads", threads, "Worker threads");
  };

  ExperimentFlags sim_flags;
  std::string dump_path;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo reconstruction accuracy");
  sim_flags.attach(*simulate, true);
  simulate->add_option("--dump-patterns", dump_path, "Write sampled cutset states as CSV");
  common(simulate, "json");

  ExperimentFlags exact_flags;
  bool dump_du = false;
  auto* exact = app.add_subcommand("exact-ra", "Exact accuracy from the (d,u) recurrence");
  exact_flags.attach(*exact, false);
  exact->add_flag("--dump-du", dump_du, "Include per-vertex (d,u)");
  common(exact, "json");

  double p = 0.0;
  double fp_tol = 1e-12;
  long max_iters = 10'000'000;
  auto* fixed_point = app.add_subcommand("fixed-point", "Limit of the homogeneous recurrence");
  fixed_point->add_option("--p", p, "Substitution probability in [0, 1/2]")->required();
  fixed_point->add_option("--tol", fp_tol, "Convergence tolerance");
  fixed_point->add_option("--max-iters", max_iters, "Iteration cap");
  common(fixed_point, "json");

  std::string br_model = "fixed:0.8";
  std::string br_depths = "4,8,12,16";
  double br_tol = 0.01;
  std::uint64_t br_seed = 0;
  int br_max_depth = kDefaultMaxDepth;
  auto* branching = app.add_subcommand("branching", "Branching-number estimate and condition check");
  branching->add_option("--model", br_model, "Weight model");
  branching->add_option("--depths", br_depths, "Increasing depth schedule, comma separated");
  branching->add_option("--tol", br_tol, "Bisection width");
  branching->add_option("--seed", br_seed, "Seed for random weights");
  branching->add_option("--max-depth", br_max_depth, "Cap on materialized depth");
  common(branching, "json");

  PercolationFlags perc;
  auto* percolation = app.add_subcommand("percolation", "Survival of the coupled percolation subtree");
  percolation->add_option("--model", perc.model, "Weight model");
  percolation->add_option("--theta-star", perc.theta_star, "Weight threshold for open edges");
  percolation->add_option("--q-tilde", perc.q_tilde, "Target open rate (uniform(0,1] weights)");
  percolation->add_option("--phi-prime", perc.phi_prime, "Derive H from phi' in (0, 1/9]");
  percolation->add_option("--H", perc.H, "Look-ahead depth H");
  percolation->add_option("--depth", perc.depth, "Survival depth");
  percolation->add_option("--trials", perc.trials, "Independent trees");
  percolation->add_option("--seed", perc.seed, "Seed");
  common(percolation, "json");

  std::string sweep_kind = "fixed_p";
  std::string grid;
  std::string sweep_depths = "5,10,15,20";
  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Exact and Monte Carlo accuracy over a parameter grid");
  sweep->add_option("--kind", sweep_kind, "fixed_p | yule_lambda");
  sweep->add_option("--grid", grid, "Parameter values, comma separated")->required();
  sweep->add_option("--depths", sweep_depths, "Depths, comma separated");
  sweep->add_option("--trials", sweep_opts.trials, "Monte Carlo trials per row (0 = exact only)");
  sweep->add_option("--tree-samples", sweep_opts.tree_samples, "Sampled trees per Yule rate");
  sweep->add_option("--seed", sweep_opts.seed, "Seed");
  sweep->add_option("--max-depth", sweep_opts.max_depth, "Cap on materialized depth");
  common(sweep, "csv");

  ExperimentFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle-check", "Brute-force accuracy versus the recurrence");
  oracle_flags.attach(*oracle, false);
  common(oracle, "json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const auto pick = [&](const char* fallback) {
      return parse_format(format_name.empty() ? fallback : format_name);
    };
    std::string text;
    int code = 0;
    if (*simulate) {
      text = cmd_simulate(sim_flags, pick("json"), threads, dump_path);
    } else if (*exact) {
      text = cmd_exact_ra(exact_flags, pick("json"), dump_du);
    } else if (*fixed_point) {
      text = cmd_fixed_point(p, fp_tol, max_iters, pick("json"));
    } else if (*branching) {
      text = cmd_branching(br_model, br_depths, br_tol, br_seed, br_max_depth, pick("json"));
    } else if (*percolation) {
      text = cmd_percolation(perc, pick("json"), threads);
    } else if (*sweep) {
      sweep_opts.threads = threads;
      text = cmd_sweep(sweep_kind, grid, sweep_depths, sweep_opts, pick("csv"));
    } else if (*oracle) {
      bool agreed = false;
      text = cmd_oracle_check(oracle_flags, pick("json"), agreed);
      code = agreed ? 0 : 1;
    }
    emit(text, output, out);
    return code;
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace parsimony_threshold
