#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "capcount/cli.hpp"
#include "capcount/problem_io.hpp"

using namespace capcount;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(CAPCOUNT_TEST_DATA) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("capcount_test_" + name);
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST_CASE("capacity on the two-block example") {
  const auto r = run_cli({"capacity", "--problem", data("ex1.json")});
  CHECK(r.code == cli::kOk);
  const auto j = json::parse(r.out);
  CHECK(j["task"] == "capacity");
  CHECK(j["value"].get<double>() == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(j["status"] == "converged");
  CHECK(j["seed"] == 0);
  for (const char* key : {"value", "log_value", "lower", "upper", "bound_name", "status", "iterations"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("count on the all-ones permanent") {
  const auto r = run_cli({"count", "--problem", data("perm3.json"), "--verify"});
  CHECK(r.code == cli::kOk);
  const auto j = json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(27.0).epsilon(1e-6));
  CHECK(j["lower"].get<double>() == doctest::Approx(6.0).epsilon(1e-5));
  CHECK(j["upper"].get<double>() == doctest::Approx(27.0).epsilon(1e-6));
  CHECK(j["verified"] == true);
}

TEST_CASE("subdet on a diagonal kernel") {
  const auto r = run_cli({"subdet", "--problem", data("diag.json")});
  CHECK(r.code == cli::kOk);
  const auto j = json::parse(r.out);
  CHECK(j["lower"].get<double>() <= 12.0);
  CHECK(j["upper"].get<double>() >= 12.0 * (1 - 1e-6));
}

TEST_CASE("entropy and oracle subcommands") {
  auto r = run_cli({"entropy", "--problem", data("ex2_sparse.json")});
  CHECK(r.code == cli::kOk);
  CHECK(json::parse(r.out)["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-5));
  r = run_cli({"oracle", "--oracle", "coeff_sum", "--problem", data("ex1.json")});
  CHECK(r.code == cli::kOk);
  CHECK(json::parse(r.out)["value"].get<double>() == 0.0);
  CHECK(json::parse(r.out)["task"] == "oracle-coeff_sum");
  r = run_cli({"oracle", "--problem", data("perm_oracle.json")});
  CHECK(r.code == cli::kOk);
  CHECK(json::parse(r.out)["value"].get<double>() == doctest::Approx(10.0));
}

TEST_CASE("schema errors name the offending field") {
  auto r = run_cli({"capacity", "--problem", data("bad.json")});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.polynomial.terms[1][1]") != std::string::npos);
  const auto mismatch = write_temp("mismatch.json", R"({"polynomial": {"kind": "product", "A": [[1, 1, 1]]},
      "matroid": {"kind": "uniform", "m": 2, "n": 1}})");
  r = run_cli({"capacity", "--problem", mismatch});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.polynomial.m") != std::string::npos);
  const auto unknown = write_temp("unknown.json", R"({"matroid": {"kind": "uniform", "m": 2, "n": 1, "rank": 3}})");
  r = run_cli({"capacity", "--problem", unknown});
  CHECK(r.err.find("$.matroid.rank") != std::string::npos);
  r = run_cli({"count", "--problem", data("ex1.json")});
  CHECK(r.code == cli::kInputError);
  r = run_cli({"bogus"});
  CHECK(r.code == cli::kInputError);
  r = run_cli({"capacity", "--problem", data("ex1.json"), "--format", "xml"});
  CHECK(r.code == cli::kInputError);
}

TEST_CASE("budget exhaustion exits with 2") {
  const auto r = run_cli({"capacity", "--problem", data("perm3.json"), "--budget", "1"});
  CHECK(r.code == cli::kBudgetExhausted);
  CHECK(json::parse(r.out)["status"] == "budget_exhausted");
}

TEST_CASE("verification failure exits with 3") {
  // With eps = 10 the ascent stops at its starting point, whose value 3 is
  // below the largest base coefficient 5.
  auto r = run_cli({"maximize", "--problem", data("skewed.json"), "--eps", "10", "--verify"});
  CHECK(r.code == cli::kVerifyFailed);
  CHECK(json::parse(r.out)["verified"] == false);
  r = run_cli({"maximize", "--problem", data("skewed.json"), "--verify"});
  CHECK(r.code == cli::kOk);
  CHECK(json::parse(r.out)["value"].get<double>() == doctest::Approx(5.0).epsilon(1e-5));
}

TEST_CASE("tsv output and several problems in parallel") {
  const auto r = run_cli({"capacity", "--problem", data("ex1.json"), "--problem", data("perm3.json"), "--format",
                          "tsv", "--jobs", "2"});
  CHECK(r.code == cli::kOk);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("problem\ttask\tvalue", 0) == 0);
  CHECK(lines[1].find("ex1.json") != std::string::npos);
  CHECK(lines[2].find("perm3.json") != std::string::npos);
}

TEST_CASE("identical inputs give byte-identical documents") {
  for (const char* task : {"capacity", "count", "maximize"}) {
    const auto a = run_cli({task, "--problem", data("perm3.json"), "--seed", "7"});
    const auto b = run_cli({task, "--problem", data("perm3.json"), "--seed", "7"});
    CHECK(a.out == b.out);
    CHECK(json::parse(a.out)["seed"] == 7);
  }
}

TEST_CASE("problem files parse every matroid kind") {
  const json j = json::parse(R"({
    "polynomial": {"kind": "determinantal", "V": [[1, 0], [0, 1], [1, 1]]},
    "matroid": {"kind": "graphic", "vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}})");
  const auto p = parse_problem(j);
  CHECK(p.matroid->n() == 2);
  CHECK(parse_matroid(json::parse(R"({"kind": "linear", "V": [[1, 0], [0, 1], [1, 1]], "regular": true})")).is_regular());
  CHECK(parse_matroid(json::parse(R"({"kind": "explicit", "m": 3, "bases": [[0, 1], [1, 2]],
                                      "assert_strongly_rayleigh": true})"))
            .strongly_rayleigh_asserted());
  CHECK(parse_polynomial(json::parse(R"({"kind": "partition_power", "m": 3, "parts": [[0, 1], [2]],
                                         "powers": [2, 1], "coeff": 0.5})"))
            .degree() == 3);
  CHECK_THROWS_AS(parse_matroid(json::parse(R"({"kind": "partition", "m": 3, "parts": [[0, 1]], "quotas": [3]})")),
                  SchemaError);
  CHECK_THROWS_AS(parse_polynomial(json::parse(R"({"kind": "cubic"})")), SchemaError);
}
