#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "parsimony_threshold/errors.hpp"
#include "parsimony_threshold/harness.hpp"
#include "parsimony_threshold/recurrence.hpp"

using namespace parsimony_threshold;

namespace {

WeightedTree constant_tree(double w, int depth) {
  const Cutset cut = Cutset::regular(depth);
  return WeightedTree(std::vector<double>(cut.frame_size(), w), cut);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("mc_estimate_ra examples") {
  const auto noiseless = build_tree(WeightModel::fixed(1.0), 5, 0);
  const auto perfect = mc_estimate_ra(noiseless, regular_cutset(noiseless, 5), 2000, 1, 1);
  CHECK(perfect.estimate == 1.0);
  CHECK(perfect.stderr_ == 0.0);
  CHECK(perfect.successes == 2000);

  const auto blind_tree = constant_tree(0.0, 4);
  const auto blind = mc_estimate_ra(blind_tree, blind_tree.boundary(), 40000, 2, 1);
  CHECK(std::abs(blind.estimate - 0.5) < 4.0 * 0.5 / std::sqrt(40000.0));

  const auto cherry = build_tree(WeightModel::fixed(0.75), 1, 0);
  const auto est = mc_estimate_ra(cherry, cherry.boundary(), 100000, 3, 1);
  CHECK(std::abs(est.estimate - 0.875) < 4.0 * est.stderr_);

  CHECK_THROWS_AS(mc_estimate_ra(cherry, cherry.boundary(), 0, 3, 1), ValidationError);
  CHECK_THROWS_AS(mc_estimate_ra(cherry, Cutset::regular(2), 10, 3, 1), RangeError);
}

TEST_CASE("mc_estimate_ra is deterministic and thread-count independent") {
  const auto tree = build_tree(WeightModel::yule(4.0), 8, 9);
  const auto cut = regular_cutset(tree, 8);
  const auto one = mc_estimate_ra(tree, cut, 5000, 42, 1);
  const auto again = mc_estimate_ra(tree, cut, 5000, 42, 1);
  const auto four = mc_estimate_ra(tree, cut, 5000, 42, 4);
  CHECK(one.successes == again.successes);
  CHECK(one.successes == four.successes);
  CHECK(mc_estimate_ra(tree, cut, 5000, 43, 1).successes != one.successes);
}

TEST_CASE("brute_force_ra examples") {
  const auto cherry = build_tree(WeightModel::fixed(0.75), 1, 0);
  CHECK(brute_force_ra(cherry, cherry.boundary()) == doctest::Approx(0.875).epsilon(1e-15));
  const auto root = build_tree(WeightModel::fixed(0.4), 0, 0);
  CHECK(brute_force_ra(root, root.boundary()) == 1.0);
  const auto tree = build_tree(WeightModel::fixed(0.75), 2, 0);
  CHECK(brute_force_ra(tree, tree.boundary()) == doctest::Approx(863.0 / 1024.0).epsilon(1e-14));

  const auto deep = build_tree(WeightModel::fixed(0.9), 5, 0);
  CHECK_THROWS_AS(brute_force_ra(deep, deep.boundary()), ResourceError);
}

TEST_CASE("brute force, recurrence and joint enumeration agree") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto tree = build_tree(WeightModel::iid(uniform_weights(0.0, 1.0)), 4, seed);
    for (int n = 0; n <= 4; ++n) {
      const auto cut = regular_cutset(tree, n);
      const double bf = brute_force_ra(tree, cut);
      CHECK(std::abs(bf - exact_ra(tree, cut)) <= 1e-12);
      if (n <= 3) CHECK(std::abs(bf - oracle::joint_enumeration_ra(tree, cut)) <= 1e-12);
    }
  }
  // A lopsided cutset: vertex 2, then the right child at each level of the
  // left spine, closed by the spine's end at level 8.
  const auto tree = build_tree(WeightModel::yule(2.0), 8, 4);
  std::vector<VertexId> vs{2};
  VertexId v = 1;
  for (int level = 1; level < 8; ++level) {
    vs.push_back(heap::right_child(v));
    v = heap::left_child(v);
  }
  vs.push_back(v);
  const auto cut = validate_cutset(tree, vs);
  CHECK(cut.size() == 9);
  CHECK(std::abs(brute_force_ra(tree, cut) - exact_ra(tree, cut)) <= 1e-12);
}

TEST_CASE("CutsetSpec and ExperimentConfig parsing") {
  const auto reg = CutsetSpec::parse("regular:4");
  CHECK(reg.kind == CutsetSpec::Kind::kRegular);
  CHECK(reg.level == 4);
  const auto list = CutsetSpec::parse("list:1,5,6");
  CHECK(list.kind == CutsetSpec::Kind::kExplicit);
  CHECK(list.vertices == std::vector<VertexId>{1, 5, 6});
  CHECK_THROWS_AS(CutsetSpec::parse("regular:x"), ValidationError);
  CHECK_THROWS_AS(CutsetSpec::parse("ring:3"), ValidationError);
  CHECK_THROWS_AS(CutsetSpec::parse("list:1,,2"), ValidationError);

  const auto config = ExperimentConfig::from_json(nlohmann::json::parse(R"({
    "model": "fixed:0.75", "cutset": "regular:1", "trials": 20000, "seed": 7,
    "output": {"format": "csv"}, "threads": 2
  })"));
  CHECK(config.trials == 20000);
  CHECK(config.seed == 7);
  CHECK(config.format == OutputFormat::kCsv);
  CHECK(config.threads == 2);
  const auto [tree, cut] = resolve(config);
  CHECK(cut.size() == 2);
  CHECK(tree.weight(1) == 0.75);
  const auto est = mc_estimate_ra(config);
  CHECK(std::abs(est.estimate - 0.875) < 4.0 * est.stderr_);

  const auto listed = ExperimentConfig::from_json(nlohmann::json::parse(R"({"cutset": [1, 5, 6]})"));
  CHECK(resolve(listed).cutset.size() == 3);

  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"trials": 0})")), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"trials": "many"})")),
                  ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"model": "fixed:2"})")),
                  ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"output": {"format": "xml"}})")),
                  ValidationError);
}

TEST_CASE("resolve_threads") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("parallel_count propagates exceptions") {
  CHECK(parallel_count(100, 3, [](std::int64_t i) { return i; }) == 4950);
  CHECK(parallel_count(0, 3, [](std::int64_t) { return std::int64_t{1}; }) == 0);
  CHECK_THROWS_AS(parallel_count(10, 2,
                                 [](std::int64_t i) -> std::int64_t {
                                   if (i == 7) throw ValidationError("boom");
                                   return 1;
                                 }),
                  ValidationError);
}

TEST_CASE("dump_boundary_patterns") {
  const auto tree = build_tree(WeightModel::fixed(1.0), 1, 0);
  std::ostringstream out;
  dump_boundary_patterns(tree, tree.boundary(), 3, 5, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvSchemaLine);
  std::getline(in, line);
  CHECK(line == "trial,vertex,state");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::string other;
    std::getline(in, other);
    ++rows;
    // Noiseless edges: both leaves share the root state.
    CHECK(line.back() == other.back());
  }
  CHECK(rows == 6);
}

TEST_CASE("sweep_threshold fixed_p rows") {
  const std::vector<double> grid{0.0, 0.05, 0.2};
  const std::vector<int> depths{0, 3, 6};
  SweepOptions options;
  const auto result = sweep_threshold(SweepKind::kFixedP, grid, depths, options);
  REQUIRE(result.rows.size() == 9);
  for (const auto& row : result.rows) {
    CHECK(std::abs(row.ra_exact - (0.5 + 0.5 * row.d_root)) <= 1e-15);
    CHECK(std::isnan(row.ra_mc));
    if (row.parameter == 0.0 || row.depth == 0) CHECK(row.ra_exact == 1.0);
  }
  CHECK(result.rows[4].d_root < result.rows[3].d_root);

  options.trials = 20000;
  options.threads = 2;
  const std::vector<double> one{0.1};
  const std::vector<int> d3{3};
  const auto mc = sweep_threshold(SweepKind::kFixedP, one, d3, options);
  CHECK(std::abs(mc.rows[0].ra_mc - mc.rows[0].ra_exact) < 4.0 * mc.rows[0].mc_stderr);

  CHECK_THROWS_AS(sweep_threshold(SweepKind::kFixedP, std::vector<double>{0.5}, d3, {}), RangeError);
  CHECK_THROWS_AS(sweep_threshold(SweepKind::kYuleLambda, std::vector<double>{0.0}, d3, {}), RangeError);
}

TEST_CASE("sweep_threshold yule rows and CSV") {
  SweepOptions options;
  options.tree_samples = 20;
  options.trials = 2000;
  options.seed = 3;
  const std::vector<double> grid{4.0};
  const std::vector<int> depths{2, 4};
  const auto a = sweep_threshold(SweepKind::kYuleLambda, grid, depths, options);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].tree_ra.size() == 20);
  for (const auto& row : a.rows) {
    CHECK(row.ra_median >= 0.5);
    CHECK(row.ra_median <= 1.0);
    CHECK(std::abs(row.ra_mc - row.ra_exact) < 5.0 * row.mc_stderr);
  }
  options.threads = 3;
  const auto b = sweep_threshold(SweepKind::kYuleLambda, grid, depths, options);
  std::ostringstream ca, cb;
  write_sweep_csv(a, ca);
  write_sweep_csv(b, cb);
  CHECK(ca.str() == cb.str());
  CHECK(ca.str().rfind("# parsimony-threshold v1\nkind,parameter,depth,d_root,ra_exact,ra_median,ra_mc,"
                       "mc_stderr,tree_samples\nyule_lambda,4,2,",
                       0) == 0);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.875) == "0.875");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

}
