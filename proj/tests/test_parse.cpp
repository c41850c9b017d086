#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "defopt/defopt.hpp"

using defopt::ParseError;
using defopt::parse_problem;
using defopt::parse_problem_source;
using defopt::parse_selfmap;
using defopt::Problem;
using defopt::SelfMap;

namespace {

const char* kProblem51 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "minimize x1^2 + x1*x2 + x2^2 - 5*x2\n"
    "eq x1 + x2 - 1\n"
    "le -x1\n"
    "le -x2\n";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("a full problem file yields domain, objective and constraints") {
  Problem p = parse_problem(kProblem51);
  CHECK(p.arity == 2);
  CHECK(p.equalities.size() == 1);
  CHECK(p.inequalities.size() == 2);
  CHECK(p.domain.lower == std::vector<double>{-10.0, -10.0});
  CHECK(p.domain.upper == std::vector<double>{10.0, 10.0});

  std::vector<double> opt{0.0, 1.0};
  CHECK(p.objective.eval(opt) == -4.0);
  CHECK(defopt::feasibility_measure(p, opt) == 0.0);
  std::vector<double> ones{1.0, 1.0};
  CHECK(defopt::feasibility_measure(p, ones) == 1.0);
}

TEST_CASE("relational sugar normalizes constraints to one-sided form") {
  Problem p = parse_problem(
      "var x1 in [-10, 10]\n"
      "var x2 in [-10, 10]\n"
      "minimize x1\n"
      "eq x1 + x2 = 1\n"
      "le x1^2 + x2^2 <= 25\n"
      "le x1 + x2 >= 7\n");
  std::vector<double> pt{1.0, 1.0};
  // eq A = B stores A - B.
  CHECK(p.equalities[0].eval(pt) == 1.0);
  // le A <= B stores A - B; le A >= B stores B - A.
  CHECK(p.inequalities[0].eval(pt) == -23.0);
  CHECK(p.inequalities[1].eval(pt) == 5.0);
}

TEST_CASE("problem grammar violations carry positions") {
  auto expect_error = [](const char* text, int line) {
    try {
      parse_problem(text);
      FAIL(text);
    } catch (const ParseError& e) {
      INFO(text);
      CHECK(e.line() == line);
    }
  };
  // Two objectives.
  expect_error("var x1 in [0, 1]\nminimize x1\nminimize x1\n", 3);
  // Constraint references an undeclared variable.
  expect_error("var x1 in [0, 1]\nvar x2 in [0, 1]\nminimize x1\neq x3\n", 4);
  // Duplicate declaration.
  expect_error("var x1 in [0, 1]\nvar x1 in [0, 1]\nminimize x1\n", 2);
  // Declarations out of order.
  expect_error("var x2 in [0, 1]\n", 1);
  // Objective before any variables.
  expect_error("minimize 1\n", 1);
  // Constraint ahead of the objective.
  expect_error("var x1 in [0, 1]\nle -x1\nminimize x1\n", 2);
  // Declaration after the objective.
  expect_error("var x1 in [0, 1]\nminimize x1\nvar x2 in [0, 1]\n", 3);
  // Inverted bounds.
  expect_error("var x1 in [1, -1]\nminimize x1\n", 1);
  // Equality sugar in an inequality clause.
  expect_error("var x1 in [0, 1]\nminimize x1\nle x1 = 1\n", 3);
  // Comparison sugar in an equality clause.
  expect_error("var x1 in [0, 1]\nminimize x1\neq x1 <= 1\n", 3);
  // Comparison in the objective.
  expect_error("var x1 in [0, 1]\nminimize x1 <= 1\n", 2);
  // Unknown clause keyword position: map is not a problem clause.
  expect_error("var x1 in [0, 1]\nminimize x1\nmap x1\n", 3);
}

TEST_CASE("missing objective is reported") {
  CHECK_THROWS_AS(parse_problem("var x1 in [0, 1]\nle -x1\n"), ParseError);
  CHECK_THROWS_AS(parse_problem("var x1 in [0, 1]\n"), ParseError);
  CHECK_THROWS_AS(parse_problem(""), ParseError);
}

TEST_CASE("problem source keeps clause-level structure") {
  auto src = parse_problem_source(kProblem51);
  CHECK(src.bounds.size() == 2);
  CHECK(src.equalities.size() == 1);
  CHECK(src.inequalities.size() == 2);
  CHECK(src.bounds[0] == std::pair<double, double>(-10.0, 10.0));
}

TEST_CASE("map files build self-maps with one component per variable") {
  SelfMap map = parse_selfmap(
      "var x1 in [-10, 10]\n"
      "map cos(x1)\n");
  CHECK(map.arity() == 1);
  std::vector<double> zero{0.0};
  CHECK(map.apply(zero) == std::vector<double>{1.0});

  CHECK_THROWS_AS(parse_selfmap("var x1 in [0, 1]\nvar x2 in [0, 1]\nmap x1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_selfmap("var x1 in [0, 1]\nmap x1\nmap x1\n"), ParseError);
  CHECK_THROWS_AS(parse_selfmap("var x1 in [0, 1]\nminimize x1\n"), ParseError);
  CHECK_THROWS_AS(parse_selfmap("map x1\n"), ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
  Problem p = parse_problem(
      "# objective below\n"
      "var x1 in [-1, 1]   # unit interval\n"
      "\n"
      "minimize x1^2  # parabola\n");
  CHECK(p.arity == 1);
  std::vector<double> pt{0.5};
  CHECK(p.objective.eval(pt) == 0.25);
}

TEST_CASE("shipped problem files parse and match the registry") {
  const std::string dir = DEFOPT_PROBLEMS_DIR;
  const char* problem_files[] = {"ex51.prob", "ex52.prob", "ex53.prob", "ex54.prob",
                                 "ex545.prob", "ex58.prob", "ex59.prob"};
  for (const char* name : problem_files) {
    INFO(name);
    CHECK_NOTHROW(parse_problem(slurp(dir + "/" + name)));
  }
  const char* map_files[] = {"ex55.map", "ex56.map"};
  for (const char* name : map_files) {
    INFO(name);
    SelfMap m = parse_selfmap(slurp(dir + "/" + name));
    CHECK(m.arity() == 5);
  }

  // The on-disk 5.1 must agree with the built-in registry everywhere.
  Problem file51 = parse_problem(slurp(dir + "/ex51.prob"));
  Problem reg51 = defopt::builtin_example(defopt::ExampleId::Ex5_1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> pt{unif(rng), unif(rng)};
    CHECK(file51.objective.eval(pt) == reg51.objective.eval(pt));
    CHECK(defopt::feasibility_measure(file51, pt) ==
          defopt::feasibility_measure(reg51, pt));
  }
}
