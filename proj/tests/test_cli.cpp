#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parsimony_threshold/cli.hpp"

using parsimony_threshold::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json json_of(const Run& r) {
  REQUIRE(r.code == 0);
  return nlohmann::json::parse(r.out);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exact-ra on the cherry") {
  const auto j = json_of(run({"exact-ra", "--model", "fixed:0.75", "--cutset", "regular:1"}));
  CHECK(j["ra"].get<double>() == 0.875);
  CHECK(j["d_root"].get<double>() == 0.75);
  CHECK(j["bound_violations"].get<int>() == 0);

  const auto csv = run({"exact-ra", "--model", "fixed:0.75", "--cutset", "regular:1", "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out == "# parsimony-threshold v1\nmodel,cutset_size,d_root,u_root,ra\nfixed:0.75,2,0.75,0.34375,0.875\n");
}

TEST_CASE("fixed-point below and above the threshold") {
  const auto high = json_of(run({"fixed-point", "--p", "0.2"}));
  CHECK(std::abs(high["d"].get<double>()) < 1e-10);
  CHECK(std::abs(high["u"].get<double>()) < 1e-10);
  CHECK(high["regime"] == "sub-threshold");
  CHECK(high["converged"] == true);

  const auto low = json_of(run({"fixed-point", "--p", "0.05"}));
  CHECK(low["regime"] == "super-threshold");
  CHECK(low["d"].get<double>() > 0.85);
}

TEST_CASE("branching on a homogeneous tree") {
  const auto j = json_of(run({"branching", "--model", "fixed:0.8"}));
  CHECK(j["summary"].get<std::string>().rfind("1.60", 0) == 0);
  CHECK(j["theorem1"]["holds"] == true);
  CHECK(std::abs(j["estimate"].get<double>() - 1.6) <= 0.01);
}

TEST_CASE("simulate, oracle-check and percolation") {
  const auto sim = json_of(run({"simulate", "--model", "fixed:0.75", "--cutset", "regular:1", "--trials",
                                "20000", "--seed", "4", "--threads", "2"}));
  CHECK(std::abs(sim["ra_mc"].get<double>() - 0.875) < 4.0 * sim["stderr"].get<double>());
  CHECK(sim["ra_exact"].get<double>() == 0.875);

  const auto oc = run({"oracle-check", "--model", "yule:3", "--cutset", "list:1,5,13,14", "--seed", "2"});
  CHECK(oc.code == 0);
  CHECK(nlohmann::json::parse(oc.out)["agree"] == true);

  const auto perc = json_of(run({"percolation", "--q-tilde", "0.9", "--trials", "2000", "--depth", "12"}));
  CHECK(perc["extinction_formula"].get<double>() == doctest::Approx(1.0 / 81.0));
  CHECK(std::abs(perc["extinction_empirical"].get<double>() - 1.0 / 81.0) <
        4.0 * std::sqrt((1.0 / 81.0) * (80.0 / 81.0) / 2000.0) + 0.005);
}

TEST_CASE("sweep CSV header and byte-identical reruns") {
  const std::vector<std::string> args{"sweep", "--kind", "fixed_p", "--grid", "0.05,0.2", "--depths",
                                      "2,4", "--trials", "1000", "--seed", "9"};
  const auto a = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("# parsimony-threshold v1\n"
                    "kind,parameter,depth,d_root,ra_exact,ra_median,ra_mc,mc_stderr,tree_samples\n",
                    0) == 0);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(run(threaded).out == a.out);

  const auto path = std::filesystem::temp_directory_path() / "parsimony_cli_sweep.csv";
  auto to_file = args;
  to_file.insert(to_file.end(), {"--output", path.string()});
  REQUIRE(run(to_file).code == 0);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == a.out);
  std::filesystem::remove(path);
}

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"exact-ra", "--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"exact-ra", "--bogus"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"fixed-point"}).code == 1);  // --p is required
  CHECK(run({"exact-ra", "--model", "fixed:1.5"}).code == 1);
  CHECK(run({"exact-ra", "--cutset", "list:0,1"}).code == 1);
  CHECK(run({"exact-ra", "--cutset", "list:1"}).code == 1);
  CHECK(run({"fixed-point", "--p", "0.7"}).code == 1);
  CHECK(run({"exact-ra", "--format", "xml"}).code == 1);
  const auto deep = run({"exact-ra", "--cutset", "regular:30"});
  CHECK(deep.code == 2);
  CHECK(deep.err.find("resource") != std::string::npos);
  CHECK(run({"oracle-check", "--cutset", "regular:5"}).code == 2);
}

}
