#pragma once

// Built-in registry of the nine benchmark problems, batch execution of the
// three solvers against them, and table/CSV report rendering. The CSV
// format is the stable machine interface; the markdown format mirrors the
// reference tables (initial point, value, x, worst residuals) per solver.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defopt/applications.hpp"
#include "defopt/parse.hpp"
#include "defopt/problem.hpp"
#include "defopt/solvers.hpp"

namespace defopt {

// Closed set of registry tags. 5.45 sits between 5.4 and 5.5, matching the
// source material's numbering.
enum class ExampleId { Ex5_1, Ex5_2, Ex5_3, Ex5_4, Ex5_45, Ex5_5, Ex5_6, Ex5_8, Ex5_9 };

inline std::span<const ExampleId> all_example_ids() {
  static const ExampleId ids[] = {ExampleId::Ex5_1, ExampleId::Ex5_2,  ExampleId::Ex5_3,
                                  ExampleId::Ex5_4, ExampleId::Ex5_45, ExampleId::Ex5_5,
                                  ExampleId::Ex5_6, ExampleId::Ex5_8,  ExampleId::Ex5_9};
  return ids;
}

inline std::string_view example_tag(ExampleId id) {
  switch (id) {
    case ExampleId::Ex5_1: return "5.1";
    case ExampleId::Ex5_2: return "5.2";
    case ExampleId::Ex5_3: return "5.3";
    case ExampleId::Ex5_4: return "5.4";
    case ExampleId::Ex5_45: return "5.45";
    case ExampleId::Ex5_5: return "5.5";
    case ExampleId::Ex5_6: return "5.6";
    case ExampleId::Ex5_8: return "5.8";
    case ExampleId::Ex5_9: return "5.9";
  }
  return "?";
}

inline ExampleId parse_example_id(std::string_view tag) {
  for (ExampleId id : all_example_ids())
    if (example_tag(id) == tag) return id;
  throw std::invalid_argument("unknown example tag '" + std::string(tag) + "'");
}

namespace detail {

inline BoxDomain standard_box(int p) {
  return BoxDomain(std::vector<double>(static_cast<std::size_t>(p), -10.0),
                   std::vector<double>(static_cast<std::size_t>(p), 10.0));
}

inline constexpr const char* kText5_1 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "minimize x1^2 + x1*x2 + x2^2 - 5*x2\n"
    "eq x1 + x2 - 1\n"
    "le -x1\n"
    "le -x2\n";

inline constexpr const char* kText5_2 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "minimize -(x1 - 3)^6 - (x2 - 4)^6\n"
    "le x1^2 + x2^2 <= 25\n"
    "le x1 + x2 >= 7\n"
    "le -x1\n"
    "le -x2\n";

inline constexpr const char* kText5_3 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "var x3 in [-10, 10]\n"
    "minimize 1/(x1*x2*x3) + x1*x2\n"
    "le 0.5*x1*x3 + 0.25*x1*x2 <= 1\n"
    "le -x1\n"
    "le -x2\n"
    "le -x3\n";

inline constexpr const char* kText5_4 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "var x3 in [-10, 10]\n"
    "minimize 1/(x1*x2*x3) + x1*x2 + x3^7\n"
    "le 0.5*x1*x3 + 0.25*x1*x2 <= 1\n"
    "le -x1\n"
    "le -x2\n"
    "le -x3\n";

inline constexpr const char* kText5_45 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "var x3 in [-10, 10]\n"
    "minimize 4*x1 + 10*x2 + 15*x3\n"
    "eq x1 + 2*x2 + 3*x3 = 3\n"
    "eq 3*x1 + x2 + 2*x3 = 7.5\n"
    "le -x1\n"
    "le -x2\n"
    "le -x3\n";

inline constexpr const char* kMap5_5 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "var x3 in [-10, 10]\n"
    "var x4 in [-10, 10]\n"
    "var x5 in [-10, 10]\n"
    "map 0.5*(cos(x1 + x2 - x3^4*x5))*x4\n"
    "map 0.1*(abs(x1*x2 + x3 - x5) + x4^2)\n"
    "map (x1 + x3*x4 - (x2 + x5)^2)/30\n"
    "map (x1 - x2^2 + x3 - x5^2)/12\n"
    "map (x1 + x2 - (x3 + x5 + x4)^2)/40\n";

inline constexpr const char* kMap5_6 =
    "var x1 in [-10, 10]\n"
    "var x2 in [-10, 10]\n"
    "var x3 in [-10, 10]\n"
    "var x4 in [-10, 10]\n"
    "var x5 in [-10, 10]\n"
    "map 0.001*((x1 + 3)^2 + (x2 - 2)^4 + x3^2 + x4^2 + x5)\n"
    "map 0.01*(x1 + (x2 + 5)^2 + x3 + x4 + (x5 + 2))\n"
    "map 0.001*(x1^4 + (x4 - 3)^2 + (x5 + 2)^2)\n"
    "map 0.001*((x3 - 3)^4 + x5^2 + x1^4) - 1\n"
    "map 0.01*(x1^2 + x2 + x3 - (x5 - 1)^2)\n";

}  // namespace detail

inline SelfMap builtin_selfmap(ExampleId id) {
  switch (id) {
    case ExampleId::Ex5_5: return parse_selfmap(detail::kMap5_5);
    case ExampleId::Ex5_6: return parse_selfmap(detail::kMap5_6);
    default:
      throw std::invalid_argument("example " + std::string(example_tag(id)) +
                                  " is not a fixed-point example");
  }
}

inline Problem builtin_example(ExampleId id) {
  switch (id) {
    case ExampleId::Ex5_1: return parse_problem(detail::kText5_1);
    case ExampleId::Ex5_2: return parse_problem(detail::kText5_2);
    case ExampleId::Ex5_3: return parse_problem(detail::kText5_3);
    case ExampleId::Ex5_4: return parse_problem(detail::kText5_4);
    case ExampleId::Ex5_45: return parse_problem(detail::kText5_45);
    case ExampleId::Ex5_5: return brouwer_problem(builtin_selfmap(id));
    case ExampleId::Ex5_6: return brouwer_problem(builtin_selfmap(id));
    case ExampleId::Ex5_8:
      return scalarize_sum(
          {parse_expression("x1^2 - 5*x1 + 7*x2", 2), parse_expression("-x1^2 - x2^2", 2),
           parse_expression("(x1 - 1)^2", 2), parse_expression("(x2 - 5)^2", 2)},
          {parse_expression("3*x1 + 4*x2 - 6", 2), parse_expression("x1 + x2 - 2", 2)},
          {parse_expression("2*x1 + 3*x2 - 6", 2), parse_expression("-x1", 2),
           parse_expression("-x2", 2)},
          detail::standard_box(2));
    case ExampleId::Ex5_9: {
      ThresholdSpec spec;
      spec.objectives = {parse_expression("4*x1^2 + x2^2 - x1 - 2", 2),
                         parse_expression("exp(-x1) - x1 - 2*x2", 2)};
      spec.caps = {1.0, 1.0};
      spec.inequalities = {
          parse_expression("2*x1 + x2 - 1", 2), parse_expression("x1^2 - 1", 2),
          parse_expression("sqrt(x1^2 + x2^2) - x1^3 - 2", 2),
          parse_expression("-x1^3 + 0.5*(-x2 - x2^3 + abs(x2^3 - x2))", 2)};
      spec.domain = detail::standard_box(2);
      return threshold_problem(spec);
    }
  }
  throw std::invalid_argument("unknown example id");
}

// Fixed start used by the two deterministic solvers: the all-ones vector
// for the low-dimensional problems, the origin for the fixed-point pair.
inline std::vector<double> builtin_start(ExampleId id) {
  switch (id) {
    case ExampleId::Ex5_1:
    case ExampleId::Ex5_2:
    case ExampleId::Ex5_8:
    case ExampleId::Ex5_9: return {1.0, 1.0};
    case ExampleId::Ex5_3:
    case ExampleId::Ex5_4:
    case ExampleId::Ex5_45: return {1.0, 1.0, 1.0};
    case ExampleId::Ex5_5:
    case ExampleId::Ex5_6: return {0.0, 0.0, 0.0, 0.0, 0.0};
  }
  throw std::invalid_argument("unknown example id");
}

struct BenchRow {
  ExampleId example = ExampleId::Ex5_1;
  SolverKind solver = SolverKind::Pso;
  std::optional<std::uint64_t> seed;                 // swarm runs only
  std::optional<std::vector<double>> initial_point;  // deterministic runs only
  double deformed_value = std::numeric_limits<double>::quiet_NaN();
  double raw_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> point;
  ConstraintReport report;
  double wall_time_ms = 0.0;
  std::string error;  // non-empty when the solve failed; value fields unset
};

struct BenchOptions {
  PenaltyParams penalty{};
  PsoConfig pso{};
  PatternConfig pattern{};
  DescentConfig descent{};
  std::vector<std::uint64_t> seeds{0};  // one swarm run per seed
};

namespace detail {

inline BenchRow run_one(ExampleId id, SolverKind solver, const BenchOptions& opts,
                        std::optional<std::uint64_t> seed) {
  BenchRow row;
  row.example = id;
  row.solver = solver;
  row.seed = seed;
  Problem problem = builtin_example(id);
  DeformedObjective field(problem, opts.penalty);
  auto t0 = std::chrono::steady_clock::now();
  try {
    RunResult run;
    switch (solver) {
      case SolverKind::Pso: {
        PsoConfig cfg = opts.pso;
        cfg.seed = seed.value();
        run = pso_minimize(std::cref(field), problem.domain, cfg);
        break;
      }
      case SolverKind::Pattern: {
        row.initial_point = builtin_start(id);
        run = pattern_search_minimize(std::cref(field), problem.domain,
                                      *row.initial_point, opts.pattern);
        break;
      }
      case SolverKind::Descent: {
        row.initial_point = builtin_start(id);
        run = descent_minimize(std::cref(field), problem.domain, *row.initial_point,
                               opts.descent);
        break;
      }
    }
    row.point = run.best_point;
    row.deformed_value = run.best_value;
    row.raw_value = problem.objective.eval(row.point);
    row.report = constraint_report(problem, row.point);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return row;
}

}  // namespace detail

// Runs every requested example under one solver kind, in input order. The
// swarm solver produces one row per seed; the deterministic solvers take
// their start points from the registry. A failed solve is recorded in its
// row rather than aborting the batch.
inline std::vector<BenchRow> run_benchmark(std::span<const ExampleId> ids,
                                           SolverKind solver, const BenchOptions& opts) {
  if (ids.empty()) throw std::invalid_argument("no examples requested");
  if (solver == SolverKind::Pso && opts.seeds.empty())
    throw std::invalid_argument("the swarm solver needs at least one seed");
  std::vector<BenchRow> rows;
  for (ExampleId id : ids) {
    if (solver == SolverKind::Pso) {
      for (std::uint64_t seed : opts.seeds)
        rows.push_back(detail::run_one(id, solver, opts, seed));
    } else {
      rows.push_back(detail::run_one(id, solver, opts, std::nullopt));
    }
  }
  return rows;
}

enum class ReportFormat { Markdown, Csv };

inline ReportFormat parse_report_format(std::string_view name) {
  if (name == "markdown") return ReportFormat::Markdown;
  if (name == "csv") return ReportFormat::Csv;
  throw std::invalid_argument("unknown format '" + std::string(name) +
                              "' (expected markdown or csv)");
}

// Cell renderers shared by the report formats: 6 significant digits,
// vectors as (a;b;c), absent or non-finite values as "-".
inline std::string fmt_value(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fmt_point(std::span<const double> x) {
  if (x.empty()) return "-";
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ";";
    out += fmt_value(x[i]);
  }
  out += ")";
  return out;
}

inline std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt_value(*v) : "-";
}

inline constexpr const char* kCsvHeader =
    "example,solver,seed,initial_point,deformed_value,raw_value,point,"
    "max_eq_residual,max_ineq_value,wall_time_ms";

// Renders rows as CSV (stable header above) or as one markdown table per
// solver. Vectors print as (a;b;c) so they never collide with the CSV
// separator; absent values print as "-".
inline std::string emit_report(std::span<const BenchRow> rows, ReportFormat format) {
  if (rows.empty()) throw std::invalid_argument("no rows to report");
  std::string out;
  if (format == ReportFormat::Csv) {
    out += kCsvHeader;
    out += "\n";
    for (const BenchRow& row : rows) {
      out += std::string(example_tag(row.example)) + "," + solver_name(row.solver) + ",";
      out += row.seed ? std::to_string(*row.seed) : "-";
      out += ",";
      out += row.initial_point ? fmt_point(*row.initial_point) : "-";
      out += "," + fmt_value(row.deformed_value);
      out += "," + fmt_value(row.raw_value);
      out += "," + fmt_point(row.point);
      out += "," + fmt_optional(row.report.max_eq_residual);
      out += "," + fmt_optional(row.report.max_ineq_value);
      out += "," + fmt_value(row.wall_time_ms);
      out += "\n";
    }
    return out;
  }

  std::string failures;
  for (SolverKind solver :
       {SolverKind::Pso, SolverKind::Pattern, SolverKind::Descent}) {
    bool any = false;
    for (const BenchRow& row : rows) any = any || row.solver == solver;
    if (!any) continue;
    out += std::string("## ") + solver_name(solver) + "\n\n";
    out += "| example | initial point | value | x | max|g_i(x)| | max h_j(x) | wall ms |\n";
    out += "| --- | --- | --- | --- | --- | --- | --- |\n";
    for (const BenchRow& row : rows) {
      if (row.solver != solver) continue;
      out += "| " + std::string(example_tag(row.example)) + " | ";
      out += (row.initial_point ? fmt_point(*row.initial_point) : "-") + " | ";
      out += fmt_value(row.raw_value) + " | ";
      out += fmt_point(row.point) + " | ";
      out += fmt_optional(row.report.max_eq_residual) + " | ";
      out += fmt_optional(row.report.max_ineq_value) + " | ";
      out += fmt_value(row.wall_time_ms) + " |\n";
      if (!row.error.empty())
        failures += std::string("failed: ") + std::string(example_tag(row.example)) +
                    "/" + solver_name(row.solver) + ": " + row.error + "\n";
    }
    out += "\n";
  }
  if (!failures.empty()) out += failures;
  return out;
}

struct GridResult {
  std::vector<double> point;
  double value = 0.0;
};

// Brute-force reference: scan the axis-aligned lattice lower + step * k,
// keep the best point whose constraint violation stays within feas_tol and
// whose objective is finite. Exponential in dimension; intended for the
// p <= 3 problems as an independent check on the solvers, not for use as a
// solver itself. Returns nothing when no lattice point is feasible.
inline std::optional<GridResult> grid_minimize(const Problem& problem, double step,
                                               double feas_tol) {
  problem.validate();
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const int p = problem.arity;
  std::vector<long long> counts(static_cast<std::size_t>(p));
  for (int d = 0; d < p; ++d) {
    auto di = static_cast<std::size_t>(d);
    counts[di] = static_cast<long long>(
        std::floor((problem.domain.upper[di] - problem.domain.lower[di]) / step + 1e-9));
  }

  std::vector<long long> k(static_cast<std::size_t>(p), 0);
  std::vector<double> x(static_cast<std::size_t>(p));
  std::optional<GridResult> best;
  while (true) {
    for (int d = 0; d < p; ++d) {
      auto di = static_cast<std::size_t>(d);
      x[di] = problem.domain.lower[di] + step * static_cast<double>(k[di]);
    }
    // Violation with early exit: every term is nonnegative, so the partial
    // sum crossing feas_tol already decides infeasibility.
    double violation = 0.0;
    bool usable = true;
    for (const Expr& g : problem.equalities) {
      double v = g.eval(x);
      if (!std::isfinite(v)) { usable = false; break; }
      violation += std::fabs(v);
      if (violation > feas_tol) { usable = false; break; }
    }
    if (usable) {
      for (const Expr& h : problem.inequalities) {
        double v = h.eval(x);
        if (!std::isfinite(v)) { usable = false; break; }
        violation += std::fabs(v) + v;
        if (violation > feas_tol) { usable = false; break; }
      }
    }
    if (usable) {
      double f = problem.objective.eval(x);
      if (std::isfinite(f) && (!best || f < best->value)) best = GridResult{x, f};
    }
    // Odometer advance, last coordinate fastest (plain nested-loop order).
    int d = p - 1;
    while (d >= 0) {
      auto di = static_cast<std::size_t>(d);
      if (++k[di] <= counts[di]) break;
      k[di] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return best;
}

}  // namespace defopt
