#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "defopt/bench.hpp"
#include "defopt/problem.hpp"
#include "defopt/solvers.hpp"
#include "oracle_forms.hpp"

using defopt::BoxDomain;
using defopt::builtin_example;
using defopt::deform;
using defopt::DeformedObjective;
using defopt::DescentConfig;
using defopt::descent_minimize;
using defopt::EvaluationError;
using defopt::finite_difference_gradient;
using defopt::PatternConfig;
using defopt::pattern_search_minimize;
using defopt::Problem;
using defopt::PsoConfig;
using defopt::pso_minimize;
using defopt::RunResult;
using defopt::ScalarField;
using defopt::SolverError;

namespace {

BoxDomain square(double lo, double hi, int p = 2) {
  return BoxDomain(std::vector<double>(static_cast<std::size_t>(p), lo),
                   std::vector<double>(static_cast<std::size_t>(p), hi));
}

DeformedObjective deformed_example(const char* tag) {
  return deform(builtin_example(defopt::parse_example_id(tag)));
}

void expect_well_formed(const RunResult& r, const BoxDomain& box) {
  REQUIRE(box.contains(r.best_point));
  REQUIRE(std::isfinite(r.best_value));
  REQUIRE(r.evaluations_used > 0);
  REQUIRE_FALSE(r.history.empty());
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    REQUIRE(r.history[i].first >= r.history[i - 1].first);
    REQUIRE(r.history[i].second <= r.history[i - 1].second);
  }
  REQUIRE(r.history.back().second == r.best_value);
}

bool same_result(const RunResult& a, const RunResult& b) {
  return a.best_point == b.best_point && a.best_value == b.best_value &&
         a.iterations_used == b.iterations_used &&
         a.evaluations_used == b.evaluations_used && a.history == b.history &&
         a.stalled == b.stalled;
}

}  // namespace

TEST_CASE("central differences recover simple analytic derivatives") {
  ScalarField square1 = [](std::span<const double> x) { return x[0] * x[0]; };
  auto g = finite_difference_gradient(square1, std::vector<double>{3.0}, 1e-6);
  REQUIRE_THAT(g[0], Catch::Matchers::WithinAbs(6.0, 1e-6));

  ScalarField product = [](std::span<const double> x) { return x[0] * x[1]; };
  auto g2 = finite_difference_gradient(product, std::vector<double>{2.0, 5.0}, 1e-6);
  REQUIRE_THAT(g2[0], Catch::Matchers::WithinAbs(5.0, 1e-6));
  REQUIRE_THAT(g2[1], Catch::Matchers::WithinAbs(2.0, 1e-6));

  Problem p1 = builtin_example(defopt::ExampleId::Ex5_1);
  ScalarField obj = [&](std::span<const double> x) { return p1.objective.eval(x); };
  auto g3 = finite_difference_gradient(obj, std::vector<double>{1.0, 1.0}, 1e-6);
  REQUIRE_THAT(g3[0], Catch::Matchers::WithinAbs(3.0, 1e-5));
  REQUIRE_THAT(g3[1], Catch::Matchers::WithinAbs(-2.0, 1e-5));

  REQUIRE_THROWS_AS(finite_difference_gradient(square1, std::vector<double>{1.0}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("central differences match hand gradients of the polynomial objectives") {
  struct Case {
    const char* tag;
    std::vector<double> (*grad)(std::span<const double>);
    double lo, hi;
  };
  // The sextic objective is sampled away from the box corners: near (10, 10)
  // its values reach 1e7 and the difference quotient loses enough digits to
  // cancellation that no h can deliver 1e-5 absolute there.
  const Case cases[] = {{"5.1", &oracle::grad_5_1, -10.0, 10.0},
                        {"5.2", &oracle::grad_5_2, -1.0, 7.0},
                        {"5.45", &oracle::grad_5_45, -10.0, 10.0},
                        {"5.8", &oracle::grad_5_8, -10.0, 10.0}};

  std::mt19937 rng(7771);
  for (const Case& c : cases) {
    Problem p = builtin_example(defopt::parse_example_id(c.tag));
    ScalarField obj = [&](std::span<const double> x) { return p.objective.eval(x); };
    std::uniform_real_distribution<double> dist(c.lo, c.hi);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(p.arity));
      for (double& v : x) v = dist(rng);
      auto fd = finite_difference_gradient(obj, x, 1e-6);
      auto exact = c.grad(x);
      for (std::size_t d = 0; d < x.size(); ++d)
        REQUIRE_THAT(fd[d], Catch::Matchers::WithinAbs(exact[d], 1e-5));
    }
  }
}

TEST_CASE("difference quotients fall back to one-sided forms at a boundary") {
  // sqrt is only defined to the right of zero, so the minus probe is NaN.
  ScalarField root = [](std::span<const double> x) { return std::sqrt(x[0]); };
  auto g = finite_difference_gradient(root, std::vector<double>{0.0}, 1e-6);
  REQUIRE(std::isfinite(g[0]));
  REQUIRE(g[0] > 0.0);

  ScalarField nowhere = [](std::span<const double>) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  try {
    finite_difference_gradient(nowhere, std::vector<double>{0.0}, 1e-6);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    REQUIRE(e.constraint_index() == 0);
  }
}

TEST_CASE("swarm finds the minimum of a separated quadratic") {
  ScalarField bowl = [](std::span<const double> x) {
    return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 4.0) * (x[1] + 4.0);
  };
  BoxDomain box = square(-10.0, 10.0);
  RunResult r = pso_minimize(bowl, box, PsoConfig{});
  expect_well_formed(r, box);
  REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(3.0, 1e-4));
  REQUIRE_THAT(r.best_point[1], Catch::Matchers::WithinAbs(-4.0, 1e-4));
}

TEST_CASE("swarm slides the penalty valley down to the constrained optimum") {
  // The deformed field's feasible set is a thin diagonal valley; the scalar
  // per-particle draws in the velocity update are what keep samples aligned
  // with it (see the solver header). The end-to-end check: the swarm reaches
  // the constrained minimum, not just the valley floor.
  DeformedObjective field = deformed_example("5.1");
  BoxDomain box = field.problem().domain;
  RunResult r = pso_minimize(field, box, PsoConfig{});
  expect_well_formed(r, box);
  REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(0.0, 1e-2));
  REQUIRE_THAT(r.best_point[1], Catch::Matchers::WithinAbs(1.0, 1e-2));
  double raw = field.problem().objective.eval(r.best_point);
  REQUIRE_THAT(raw, Catch::Matchers::WithinAbs(-4.0, 1e-3));
  REQUIRE(r.best_value < -5.19);  // deformed optimum is 0.05*(-104) = -5.2
}

TEST_CASE("swarm runs are reproducible and consume a fixed budget") {
  DeformedObjective field = deformed_example("5.1");
  BoxDomain box = field.problem().domain;

  PsoConfig seeded;
  seeded.seed = 42;
  RunResult a = pso_minimize(field, box, seeded);
  RunResult b = pso_minimize(field, box, seeded);
  REQUIRE(same_result(a, b));

  PsoConfig other;
  other.seed = 43;
  RunResult c = pso_minimize(field, box, other);
  REQUIRE(a.best_point != c.best_point);
  REQUIRE(a.history != c.history);

  // The synchronous swarm never stops early, so the evaluation count is a
  // function of the configuration alone: init + swarm * iterations.
  const long long budget = 100 + 100LL * 2000;
  REQUIRE(a.evaluations_used == budget);
  REQUIRE(c.evaluations_used == budget);
}

TEST_CASE("swarm treats non-finite values as rejections") {
  // A NaN pocket covers a quarter of the box; the minimum lies outside it.
  ScalarField pocket = [](std::span<const double> x) {
    if (x[0] < -5.0) return std::numeric_limits<double>::quiet_NaN();
    return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 4.0) * (x[1] + 4.0);
  };
  BoxDomain box = square(-10.0, 10.0);
  RunResult r = pso_minimize(pocket, box, PsoConfig{});
  REQUIRE(std::isfinite(r.best_value));
  REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(3.0, 1e-4));

  ScalarField nowhere = [](std::span<const double>) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  REQUIRE_THROWS_AS(pso_minimize(nowhere, box, PsoConfig{}), SolverError);
}

TEST_CASE("swarm configuration is validated") {
  ScalarField flat = [](std::span<const double>) { return 0.0; };
  BoxDomain box = square(-1.0, 1.0);
  auto reject = [&](PsoConfig cfg) {
    REQUIRE_THROWS_AS(pso_minimize(flat, box, cfg), std::invalid_argument);
  };
  PsoConfig cfg;
  cfg.swarm_size = 1;
  reject(cfg);
  cfg = PsoConfig{};
  cfg.inertia = 1.0;
  reject(cfg);
  cfg = PsoConfig{};
  cfg.inertia = -0.1;
  reject(cfg);
  cfg = PsoConfig{};
  cfg.cognitive = -1.0;
  reject(cfg);
  cfg = PsoConfig{};
  cfg.max_iters = 0;
  reject(cfg);
}

TEST_CASE("compass search walks an absolute value straight to its kink") {
  ScalarField vee = [](std::span<const double> x) { return std::fabs(x[0]); };
  BoxDomain box = square(-10.0, 10.0, 1);
  RunResult r = pattern_search_minimize(vee, box, std::vector<double>{1.0},
                                        PatternConfig{});
  expect_well_formed(r, box);
  // From 1.0 with unit mesh the -e1 poll lands on 0 exactly, and no later
  // poll of +-2^-k can improve on it.
  REQUIRE(r.best_point[0] == 0.0);
  REQUIRE(r.best_value == 0.0);
}

TEST_CASE("compass search reproduces the constrained quadratic optimum") {
  DeformedObjective field = deformed_example("5.1");
  BoxDomain box = field.problem().domain;
  RunResult r = pattern_search_minimize(field, box, std::vector<double>{1.0, 1.0},
                                        PatternConfig{});
  expect_well_formed(r, box);
  REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(0.0, 1e-2));
  REQUIRE_THAT(r.best_point[1], Catch::Matchers::WithinAbs(1.0, 1e-2));
  double raw = field.problem().objective.eval(r.best_point);
  REQUIRE_THAT(raw, Catch::Matchers::WithinAbs(-4.0, 1e-3));
}

TEST_CASE("compass search recognizes an already optimal start") {
  // The origin is a fixed point of the five-component map, so the penalized
  // field has its global minimum there and every poll is rejected.
  DeformedObjective field = deformed_example("5.5");
  BoxDomain box = field.problem().domain;
  std::vector<double> origin(5, 0.0);
  RunResult r = pattern_search_minimize(field, box, origin, PatternConfig{});
  REQUIRE(r.best_point == origin);
  REQUIRE(r.best_value == field(origin));
  REQUIRE(feasibility_measure(field.problem(), r.best_point) == 0.0);
}

TEST_CASE("compass search converges on smooth convex bowls from any start") {
  ScalarField bowl = [](std::span<const double> x) {
    return (x[0] - 1.3) * (x[0] - 1.3) + (x[1] + 0.7) * (x[1] + 0.7);
  };
  BoxDomain box = square(-10.0, 10.0);
  const std::vector<std::vector<double>> starts = {
      {-9.0, -9.0}, {5.0, -2.0}, {0.0, 0.0}};
  PatternConfig cfg;
  for (const auto& s : starts) {
    RunResult r = pattern_search_minimize(bowl, box, s, cfg);
    expect_well_formed(r, box);
    REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(1.3, 10 * cfg.mesh_tol));
    REQUIRE_THAT(r.best_point[1], Catch::Matchers::WithinAbs(-0.7, 10 * cfg.mesh_tol));
  }
}

TEST_CASE("compass search is deterministic and validates its inputs") {
  DeformedObjective field = deformed_example("5.1");
  BoxDomain box = field.problem().domain;
  std::vector<double> start{1.0, 1.0};
  RunResult a = pattern_search_minimize(field, box, start, PatternConfig{});
  RunResult b = pattern_search_minimize(field, box, start, PatternConfig{});
  REQUIRE(same_result(a, b));

  REQUIRE_THROWS_AS(
      pattern_search_minimize(field, box, std::vector<double>{11.0, 0.0},
                              PatternConfig{}),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      pattern_search_minimize(field, box, std::vector<double>{1.0}, PatternConfig{}),
      std::invalid_argument);

  PatternConfig bad;
  bad.mesh_tol = 2.0;  // above the initial mesh
  REQUIRE_THROWS_AS(pattern_search_minimize(field, box, start, bad),
                    std::invalid_argument);
  bad = PatternConfig{};
  bad.contraction = 1.0;
  REQUIRE_THROWS_AS(pattern_search_minimize(field, box, start, bad),
                    std::invalid_argument);
  bad = PatternConfig{};
  bad.expansion = 0.5;
  REQUIRE_THROWS_AS(pattern_search_minimize(field, box, start, bad),
                    std::invalid_argument);
}

TEST_CASE("projected descent solves a smooth convex model problem") {
  ScalarField bowl = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += (v - 1.0) * (v - 1.0);
    return s;
  };
  BoxDomain box = square(-10.0, 10.0, 3);
  RunResult r = descent_minimize(bowl, box, std::vector<double>{0.0, 0.0, 0.0},
                                 DescentConfig{});
  expect_well_formed(r, box);
  REQUIRE_FALSE(r.stalled);
  for (double v : r.best_point) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("projected descent parks exactly on an optimal box corner") {
  ScalarField ramp = [](std::span<const double> x) { return -x[0] - x[1]; };
  BoxDomain box = square(-10.0, 10.0);
  RunResult r = descent_minimize(ramp, box, std::vector<double>{0.0, 0.0},
                                 DescentConfig{});
  REQUIRE(r.best_point == std::vector<double>{10.0, 10.0});
  REQUIRE_FALSE(r.stalled);
}

TEST_CASE("projected descent stalls on the penalty valley floor") {
  // The penalized equality |x1 + x2 - 1| dominates the field, so the finite
  // difference gradient points across the valley, not along it. Descent
  // rides the diagonal from (1,1) to the valley's closest point (0.5, 0.5)
  // and then no backtracked step can clear the kink: the run must end with
  // the stalled flag rather than pretending it converged.
  DeformedObjective field = deformed_example("5.1");
  BoxDomain box = field.problem().domain;
  RunResult r = descent_minimize(field, box, std::vector<double>{1.0, 1.0},
                                 DescentConfig{});
  expect_well_formed(r, box);
  REQUIRE(r.stalled);
  REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(0.5, 1e-3));
  REQUIRE_THAT(r.best_point[1], Catch::Matchers::WithinAbs(0.5, 1e-3));
  REQUIRE(r.best_value < field(std::vector<double>{1.0, 1.0}));
}

TEST_CASE("projected descent stalls on a steep tilted kink") {
  // One-dimensional caricature of the same failure: a steep vee whose tip
  // is not a representable double, tilted so the gradient never vanishes.
  ScalarField vee = [](std::span<const double> x) {
    return 9500.0 * std::fabs(x[0] - 1.0 / 3.0) - 0.05 * x[0];
  };
  BoxDomain box = square(-10.0, 10.0, 1);
  RunResult r = descent_minimize(vee, box, std::vector<double>{0.75},
                                 DescentConfig{});
  REQUIRE(r.stalled);
  REQUIRE_THAT(r.best_point[0], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-6));
}

TEST_CASE("projected descent is deterministic and validates its inputs") {
  DeformedObjective field = deformed_example("5.1");
  BoxDomain box = field.problem().domain;
  std::vector<double> start{1.0, 1.0};
  RunResult a = descent_minimize(field, box, start, DescentConfig{});
  RunResult b = descent_minimize(field, box, start, DescentConfig{});
  REQUIRE(same_result(a, b));

  REQUIRE_THROWS_AS(descent_minimize(field, box, std::vector<double>{-20.0, 0.0},
                                     DescentConfig{}),
                    std::invalid_argument);

  ScalarField pole = [](std::span<const double> x) { return 1.0 / x[0]; };
  BoxDomain line = square(-10.0, 10.0, 1);
  REQUIRE_THROWS_AS(
      descent_minimize(pole, line, std::vector<double>{0.0}, DescentConfig{}),
      std::invalid_argument);

  auto reject = [&](DescentConfig cfg) {
    REQUIRE_THROWS_AS(descent_minimize(field, box, start, cfg), std::invalid_argument);
  };
  DescentConfig cfg;
  cfg.fd_step = 0.0;
  reject(cfg);
  cfg = DescentConfig{};
  cfg.backtrack = 1.0;
  reject(cfg);
  cfg = DescentConfig{};
  cfg.armijo = 0.0;
  reject(cfg);
  cfg = DescentConfig{};
  cfg.grad_tol = -1.0;
  reject(cfg);
}

TEST_CASE("solver kinds map to and from their names") {
  using defopt::SolverKind;
  REQUIRE(defopt::parse_solver_kind("pso") == SolverKind::Pso);
  REQUIRE(defopt::parse_solver_kind("pattern") == SolverKind::Pattern);
  REQUIRE(defopt::parse_solver_kind("descent") == SolverKind::Descent);
  REQUIRE(defopt::solver_name(SolverKind::Pattern) == std::string("pattern"));
  REQUIRE_THROWS_AS(defopt::parse_solver_kind("newton"), std::invalid_argument);
}
