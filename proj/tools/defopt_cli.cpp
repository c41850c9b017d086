// Command-line front end: solve a problem file, benchmark the built-in
// examples, hunt for fixed points of a self-map, or just evaluate the
// constraint violation at a point.
//
// Exit status: 0 on success, 1 when a solve/fixpoint run ends at a point
// whose constraint violation exceeds --tol, 2 on any input error (bad
// flags, unreadable files, parse failures).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "defopt/defopt.hpp"

namespace {

struct PenaltyFlags {
  double K = 100.0;
  double M = 10000.0;
  double t = 0.95;

  defopt::PenaltyParams params() const { return {K, M, t}; }
};

void add_penalty_flags(CLI::App* cmd, PenaltyFlags& flags) {
  cmd->add_option("--K", flags.K, "Objective shift in the deformation");
  cmd->add_option("--M", flags.M, "Constraint violation weight");
  cmd->add_option("--t", flags.t, "Blend toward the penalty term, in (0,1)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "--start 1,0.5,-2" style vector literals.
std::vector<double> parse_vector_literal(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string piece = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const char* begin = piece.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
      throw std::invalid_argument("bad component '" + piece + "' in vector literal");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "cannot write to '" << out_path << "'\n";
    return 2;
  }
  f << text;
  return 0;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One-row report for an ad-hoc problem file, in the same column order as
// the benchmark tables but tagged with the file stem instead of a
// registry id.
std::string render_single(const std::string& tag, defopt::SolverKind solver,
                          std::optional<std::uint64_t> seed,
                          const std::optional<std::vector<double>>& initial,
                          const defopt::RunResult& run, double raw_value,
                          const defopt::ConstraintReport& report, double wall_ms,
                          defopt::ReportFormat format) {
  std::string out;
  if (format == defopt::ReportFormat::Csv) {
    out += defopt::kCsvHeader;
    out += "\n";
    out += tag + "," + defopt::solver_name(solver) + ",";
    out += seed ? std::to_string(*seed) : "-";
    out += ",";
    out += initial ? defopt::fmt_point(*initial) : "-";
    out += "," + defopt::fmt_value(run.best_value);
    out += "," + defopt::fmt_value(raw_value);
    out += "," + defopt::fmt_point(run.best_point);
    out += "," + defopt::fmt_optional(report.max_eq_residual);
    out += "," + defopt::fmt_optional(report.max_ineq_value);
    out += "," + defopt::fmt_value(wall_ms) + "\n";
    return out;
  }
  out += std::string("## ") + defopt::solver_name(solver) + "\n\n";
  out += "| example | initial point | value | x | max|g_i(x)| | max h_j(x) | wall ms |\n";
  out += "| --- | --- | --- | --- | --- | --- | --- |\n";
  out += "| " + tag + " | " + (initial ? defopt::fmt_point(*initial) : "-") + " | " +
         defopt::fmt_value(raw_value) + " | " + defopt::fmt_point(run.best_point) +
         " | " + defopt::fmt_optional(report.max_eq_residual) + " | " +
         defopt::fmt_optional(report.max_ineq_value) + " | " +
         defopt::fmt_value(wall_ms) + " |\n";
  return out;
}

struct SolveFlags {
  std::string problem_path;
  std::string solver = "pso";
  PenaltyFlags penalty;
  std::uint64_t seed = 0;
  std::string start_text;
  double tol = defopt::kDefaultFeasibilityTol;
  std::string out_path;
  std::string format = "markdown";
};

// Shared by solve (on a Problem) and fixpoint (on a Brouwer reduction).
defopt::RunResult dispatch_solver(const defopt::DeformedObjective& field,
                                  const defopt::BoxDomain& domain,
                                  defopt::SolverKind kind, std::uint64_t seed,
                                  const std::optional<std::vector<double>>& start) {
  switch (kind) {
    case defopt::SolverKind::Pso: {
      defopt::PsoConfig cfg;
      cfg.seed = seed;
      return defopt::pso_minimize(std::cref(field), domain, cfg);
    }
    case defopt::SolverKind::Pattern:
      return defopt::pattern_search_minimize(std::cref(field), domain, *start, {});
    case defopt::SolverKind::Descent:
      return defopt::descent_minimize(std::cref(field), domain, *start, {});
  }
  throw std::invalid_argument("unknown solver");
}

int run_solve(const SolveFlags& flags) {
  defopt::Problem problem = defopt::parse_problem(read_file(flags.problem_path));
  defopt::SolverKind kind = defopt::parse_solver_kind(flags.solver);
  std::optional<std::vector<double>> start;
  if (kind != defopt::SolverKind::Pso) {
    if (flags.start_text.empty())
      throw std::invalid_argument("solver '" + flags.solver + "' needs --start");
    start = parse_vector_literal(flags.start_text);
  }
  defopt::DeformedObjective field(problem, flags.penalty.params());

  auto t0 = std::chrono::steady_clock::now();
  defopt::RunResult run = dispatch_solver(field, problem.domain, kind, flags.seed, start);
  auto t1 = std::chrono::steady_clock::now();
  double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  double raw = problem.objective.eval(run.best_point);
  defopt::ConstraintReport report = defopt::constraint_report(problem, run.best_point);
  std::string tag = std::filesystem::path(flags.problem_path).stem().string();
  std::optional<std::uint64_t> seed_cell;
  if (kind == defopt::SolverKind::Pso) seed_cell = flags.seed;
  std::string text = render_single(tag, kind, seed_cell, start, run, raw, report,
                                   wall_ms, defopt::parse_report_format(flags.format));
  int status = write_output(text, flags.out_path);
  if (status != 0) return status;

  double violation = defopt::feasibility_measure(problem, run.best_point);
  if (violation > flags.tol) {
    std::cerr << "result violates constraints: F = " << format_full(violation) << "\n";
    return 1;
  }
  return 0;
}

struct BenchFlags {
  std::string solver = "all";
  PenaltyFlags penalty;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "markdown";
};

int run_bench(const BenchFlags& flags) {
  defopt::BenchOptions opts;
  opts.penalty = flags.penalty.params();
  opts.seeds = {flags.seed};
  std::vector<defopt::BenchRow> rows;
  auto append = [&](defopt::SolverKind kind) {
    std::vector<defopt::BenchRow> part =
        defopt::run_benchmark(defopt::all_example_ids(), kind, opts);
    rows.insert(rows.end(), part.begin(), part.end());
  };
  if (flags.solver == "all") {
    append(defopt::SolverKind::Pso);
    append(defopt::SolverKind::Pattern);
    append(defopt::SolverKind::Descent);
  } else {
    append(defopt::parse_solver_kind(flags.solver));
  }
  std::string text = defopt::emit_report(rows, defopt::parse_report_format(flags.format));
  return write_output(text, flags.out_path);
}

struct FixpointFlags {
  std::string map_path;
  std::string solver = "pso";
  PenaltyFlags penalty;
  std::uint64_t seed = 0;
  std::string start_text;
  double tol = defopt::kDefaultFeasibilityTol;
  std::string out_path;
};

int run_fixpoint(const FixpointFlags& flags) {
  defopt::SelfMap map = defopt::parse_selfmap(read_file(flags.map_path));

  defopt::ContainmentSample containment = defopt::sample_containment(map, 10000, 0);
  if (containment.escaped > 0) {
    std::cerr << "warning: map sends " << containment.escaped << " of "
              << containment.checked << " sampled points outside the box (e.g. at "
              << defopt::fmt_point(containment.witness)
              << "); fixed points may still exist but are not guaranteed\n";
  }

  defopt::Problem problem = defopt::brouwer_problem(map);
  defopt::SolverKind kind = defopt::parse_solver_kind(flags.solver);
  std::optional<std::vector<double>> start;
  if (kind != defopt::SolverKind::Pso) {
    if (flags.start_text.empty())
      throw std::invalid_argument("solver '" + flags.solver + "' needs --start");
    start = parse_vector_literal(flags.start_text);
  }
  defopt::DeformedObjective field(problem, flags.penalty.params());
  defopt::RunResult run = dispatch_solver(field, problem.domain, kind, flags.seed, start);

  double residual = defopt::fixed_point_residual(map, run.best_point);
  double violation = defopt::feasibility_measure(problem, run.best_point);
  std::string text;
  text += "x = " + defopt::fmt_point(run.best_point) + "\n";
  text += "residual = " + format_full(residual) + "\n";
  text += "F = " + format_full(violation) + "\n";
  int status = write_output(text, flags.out_path);
  if (status != 0) return status;
  return violation > flags.tol ? 1 : 0;
}

struct CheckFlags {
  std::string problem_path;
  std::string start_text;
};

int run_check(const CheckFlags& flags) {
  defopt::Problem problem = defopt::parse_problem(read_file(flags.problem_path));
  std::vector<double> point = parse_vector_literal(flags.start_text);
  if (point.size() != static_cast<std::size_t>(problem.arity))
    throw std::invalid_argument("--start has " + std::to_string(point.size()) +
                                " components but the problem has arity " +
                                std::to_string(problem.arity));
  double violation = defopt::feasibility_measure(problem, point);
  defopt::ConstraintReport report = defopt::constraint_report(problem, point);
  std::cout << "F = " << format_full(violation) << "\n";
  if (report.max_eq_residual)
    std::cout << "max|g_i(x)| = " << format_full(*report.max_eq_residual) << "\n";
  if (report.max_ineq_value)
    std::cout << "max h_j(x) = " << format_full(*report.max_ineq_value) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained optimization via exact-penalty deformation"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "Minimize a problem file");
  solve->add_option("--problem", solve_flags.problem_path, "Problem file")->required();
  solve->add_option("--solver", solve_flags.solver, "pso, pattern or descent");
  add_penalty_flags(solve, solve_flags.penalty);
  solve->add_option("--seed", solve_flags.seed, "Seed for the swarm solver");
  solve->add_option("--start", solve_flags.start_text,
                    "Start point (required for pattern/descent), e.g. 1,1");
  solve->add_option("--tol", solve_flags.tol, "Feasibility tolerance for exit status");
  solve->add_option("--out", solve_flags.out_path, "Write the report here");
  solve->add_option("--format", solve_flags.format, "markdown or csv");

  BenchFlags bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "Run the built-in example battery");
  bench->add_option("--solver", bench_flags.solver, "pso, pattern, descent or all");
  add_penalty_flags(bench, bench_flags.penalty);
  bench->add_option("--seed", bench_flags.seed, "Seed for the swarm solver");
  bench->add_option("--out", bench_flags.out_path, "Write the report here");
  bench->add_option("--format", bench_flags.format, "markdown or csv");

  FixpointFlags fix_flags;
  CLI::App* fixpoint = app.add_subcommand("fixpoint", "Find a fixed point of a self-map");
  fixpoint->add_option("--map", fix_flags.map_path, "Self-map file")->required();
  fixpoint->add_option("--solver", fix_flags.solver, "pso, pattern or descent");
  add_penalty_flags(fixpoint, fix_flags.penalty);
  fixpoint->add_option("--seed", fix_flags.seed, "Seed for the swarm solver");
  fixpoint->add_option("--start", fix_flags.start_text,
                       "Start point (required for pattern/descent)");
  fixpoint->add_option("--tol", fix_flags.tol, "Feasibility tolerance for exit status");
  fixpoint->add_option("--out", fix_flags.out_path, "Write the report here");

  CheckFlags check_flags;
  CLI::App* check = app.add_subcommand("check", "Evaluate constraints at a point");
  check->add_option("--problem", check_flags.problem_path, "Problem file")->required();
  check->add_option("--start", check_flags.start_text, "Point to evaluate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_solve(solve_flags);
    if (bench->parsed()) return run_bench(bench_flags);
    if (fixpoint->parsed()) return run_fixpoint(fix_flags);
    if (check->parsed()) return run_check(check_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
