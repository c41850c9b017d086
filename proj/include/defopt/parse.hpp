#pragma once

// Problem-definition file format: one clause per line.
//
//   file      := varline+ objline constraintline*
//   varline   := "var" IDENT "in" "[" NUMBER "," NUMBER "]"
//   objline   := "minimize" EXPR
//   constraintline := ("eq" EXPR) | ("le" EXPR)
//
// Variables must be named x1, x2, ... and declared in index order. An
// `eq` clause asserts EXPR = 0 and a `le` clause asserts EXPR <= 0; the
// relational sugar "eq A = B", "le A <= B" and "le A >= B" is accepted
// and rewritten by moving everything to the left-hand side.
//
// Self-map files (for the fixed-point subcommand) share the varline
// grammar but replace objective/constraint clauses with one "map EXPR"
// line per variable, in variable order.

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defopt/applications.hpp"
#include "defopt/expr.hpp"
#include "defopt/problem.hpp"

namespace defopt {

// Clause-level view of a parsed problem file, before semantic assembly.
struct ProblemSource {
  std::vector<std::pair<double, double>> bounds;  // one entry per variable
  Expr objective;
  std::vector<Expr> equalities;
  std::vector<Expr> inequalities;
};

namespace detail {

// One source line's worth of tokens.
using Clause = std::span<const Token>;

inline std::vector<Clause> split_clauses(std::span<const Token> tokens) {
  std::vector<Clause> out;
  std::size_t start = 0;
  while (start < tokens.size()) {
    std::size_t end = start + 1;
    while (end < tokens.size() && tokens[end].line == tokens[start].line) ++end;
    out.push_back(tokens.subspan(start, end - start));
    start = end;
  }
  return out;
}

inline bool clause_is(const Clause& c, std::string_view keyword) {
  return c[0].kind == TokenKind::Keyword && c[0].lexeme == keyword;
}

[[noreturn]] inline void fail(const Token& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

inline void expect_operator(const Clause& c, std::size_t pos, std::string_view lex) {
  if (pos >= c.size() || c[pos].kind != TokenKind::Operator || c[pos].lexeme != lex)
    fail(pos < c.size() ? c[pos] : c.back(), "expected '" + std::string(lex) + "'");
}

// NUMBER with an optional leading minus, for bound values.
inline double parse_bound(const Clause& c, std::size_t& pos) {
  double sign = 1.0;
  if (pos < c.size() && c[pos].kind == TokenKind::Operator && c[pos].lexeme == "-") {
    sign = -1.0;
    ++pos;
  }
  if (pos >= c.size() || c[pos].kind != TokenKind::Number)
    fail(pos < c.size() ? c[pos] : c.back(), "expected a number");
  double v = std::strtod(c[pos].lexeme.c_str(), nullptr);
  ++pos;
  return sign * v;
}

// var xN in [lo, hi]
inline std::pair<double, double> parse_varline(const Clause& c, int declared) {
  std::size_t pos = 1;
  if (pos >= c.size() || c[pos].kind != TokenKind::Identifier)
    fail(c[0], "expected a variable name after 'var'");
  const Token& name = c[pos];
  auto idx = variable_index(name.lexeme);
  if (!idx) fail(name, "variable names must look like x1, x2, ...");
  if (*idx <= declared) fail(name, "duplicate variable '" + name.lexeme + "'");
  if (*idx != declared + 1)
    fail(name, "variables must be declared in order; expected 'x" +
                   std::to_string(declared + 1) + "'");
  ++pos;
  if (pos >= c.size() || !(c[pos].kind == TokenKind::Keyword && c[pos].lexeme == "in"))
    fail(name, "expected 'in' after the variable name");
  ++pos;
  expect_operator(c, pos, "[");
  ++pos;
  double lo = parse_bound(c, pos);
  if (pos >= c.size() || c[pos].kind != TokenKind::Comma)
    fail(pos < c.size() ? c[pos] : c.back(), "expected ',' between bounds");
  ++pos;
  double hi = parse_bound(c, pos);
  expect_operator(c, pos, "]");
  ++pos;
  if (pos != c.size()) fail(c[pos], "unexpected '" + c[pos].lexeme + "' after bounds");
  if (!(lo < hi)) fail(name, "bounds require lower < upper");
  return {lo, hi};
}

// Which relational sugar a clause admits. The objective admits none;
// 'eq' admits only '='; 'le' admits '<=' and '>='.
enum class RelationalSugar { None, Equality, Inequality };

// Splits an expression clause body at a top-level relational operator, if
// present, and normalizes to a single left-hand-side expression.
inline Expr parse_relational(const Clause& c, int arity, RelationalSugar allowed) {
  std::span<const Token> body = c.subspan(1);
  if (body.empty()) fail(c[0], "expected an expression after '" + c[0].lexeme + "'");
  std::size_t rel = body.size();
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i].kind == TokenKind::Operator &&
        (body[i].lexeme == "=" || body[i].lexeme == "<=" || body[i].lexeme == ">=")) {
      rel = i;
      break;
    }
  }
  if (rel == body.size()) return parse_expression(body, arity);
  const Token& op = body[rel];
  bool admitted = (allowed == RelationalSugar::Equality && op.lexeme == "=") ||
                  (allowed == RelationalSugar::Inequality && op.lexeme != "=");
  if (!admitted)
    fail(op, "'" + op.lexeme + "' is not valid in a '" + c[0].lexeme + "' clause");
  if (rel == 0) fail(op, "expected an expression before '" + op.lexeme + "'");
  Expr lhs = parse_expression(body.subspan(0, rel), arity);
  Expr rhs = parse_expression(body.subspan(rel + 1), arity);
  if (op.lexeme == ">=") return rhs - lhs;
  return lhs - rhs;
}

}  // namespace detail

inline ProblemSource parse_problem_source(std::string_view source) {
  std::vector<Token> tokens = tokenize(source);
  std::vector<detail::Clause> clauses = detail::split_clauses(tokens);
  if (clauses.empty()) throw ParseError("empty problem file", 1, 1);

  ProblemSource out;
  bool have_objective = false;
  for (const detail::Clause& c : clauses) {
    if (c[0].kind != TokenKind::Keyword)
      detail::fail(c[0], "expected a clause keyword, found '" + c[0].lexeme + "'");
    if (detail::clause_is(c, "var")) {
      if (have_objective)
        detail::fail(c[0], "variable declarations must precede 'minimize'");
      out.bounds.push_back(detail::parse_varline(c, static_cast<int>(out.bounds.size())));
    } else if (detail::clause_is(c, "minimize")) {
      if (have_objective) detail::fail(c[0], "more than one 'minimize' clause");
      if (out.bounds.empty())
        detail::fail(c[0], "declare variables before the objective");
      out.objective = detail::parse_relational(c, static_cast<int>(out.bounds.size()),
                                               detail::RelationalSugar::None);
      have_objective = true;
    } else if (detail::clause_is(c, "eq") || detail::clause_is(c, "le")) {
      if (!have_objective)
        detail::fail(c[0], "constraints must follow the 'minimize' clause");
      bool is_eq = detail::clause_is(c, "eq");
      Expr e = detail::parse_relational(c, static_cast<int>(out.bounds.size()),
                                        is_eq ? detail::RelationalSugar::Equality
                                              : detail::RelationalSugar::Inequality);
      (is_eq ? out.equalities : out.inequalities).push_back(std::move(e));
    } else {
      detail::fail(c[0], "'" + c[0].lexeme + "' is not valid in a problem file");
    }
  }
  if (!have_objective) {
    const Token& last = tokens.back();
    throw ParseError("missing 'minimize' clause", last.line, last.col);
  }
  return out;
}

inline Problem build_problem(const ProblemSource& src) {
  Problem p;
  p.arity = static_cast<int>(src.bounds.size());
  p.objective = src.objective;
  p.equalities = src.equalities;
  p.inequalities = src.inequalities;
  std::vector<double> lo, hi;
  for (auto [a, b] : src.bounds) {
    lo.push_back(a);
    hi.push_back(b);
  }
  p.domain = BoxDomain(std::move(lo), std::move(hi));
  p.validate();
  return p;
}

inline Problem parse_problem(std::string_view source) {
  return build_problem(parse_problem_source(source));
}

// Self-map files: varline+ followed by exactly one "map EXPR" per variable.
inline SelfMap parse_selfmap(std::string_view source) {
  std::vector<Token> tokens = tokenize(source);
  std::vector<detail::Clause> clauses = detail::split_clauses(tokens);
  if (clauses.empty()) throw ParseError("empty map file", 1, 1);

  std::vector<std::pair<double, double>> bounds;
  std::vector<Expr> components;
  for (const detail::Clause& c : clauses) {
    if (c[0].kind != TokenKind::Keyword)
      detail::fail(c[0], "expected a clause keyword, found '" + c[0].lexeme + "'");
    if (detail::clause_is(c, "var")) {
      if (!components.empty())
        detail::fail(c[0], "variable declarations must precede 'map' clauses");
      bounds.push_back(detail::parse_varline(c, static_cast<int>(bounds.size())));
    } else if (detail::clause_is(c, "map")) {
      if (bounds.empty()) detail::fail(c[0], "declare variables before 'map' clauses");
      if (components.size() >= bounds.size())
        detail::fail(c[0], "more 'map' clauses than variables");
      std::span<const Token> body = c.subspan(1);
      if (body.empty()) detail::fail(c[0], "expected an expression after 'map'");
      components.push_back(parse_expression(body, static_cast<int>(bounds.size())));
    } else {
      detail::fail(c[0], "'" + c[0].lexeme + "' is not valid in a map file");
    }
  }
  if (components.size() != bounds.size()) {
    const Token& last = tokens.back();
    throw ParseError("expected " + std::to_string(bounds.size()) +
                         " 'map' clauses, found " + std::to_string(components.size()),
                     last.line, last.col);
  }
  std::vector<double> lo, hi;
  for (auto [a, b] : bounds) {
    lo.push_back(a);
    hi.push_back(b);
  }
  SelfMap map{std::move(components), BoxDomain(std::move(lo), std::move(hi))};
  map.validate();
  return map;
}

}  // namespace defopt
