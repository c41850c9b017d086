#pragma once

// Constrained minimization problems over a box, and the exact-penalty
// deformation that turns one into a single unconstrained objective.
//
// A problem holds an objective f, equality constraints g_i = 0 and
// inequality constraints h_j <= 0, all over the box [lower, upper]. The
// constraint violation of a point is
//
//   F(x) = sum_i |g_i(x)| + sum_j (|h_j(x)| + h_j(x))
//
// which is zero exactly on the feasible set and positive elsewhere. The
// deformed objective blends f toward that violation,
//
//   f_t(x) = (1 - t) * (f(x) - K) + t * M * F(x)
//
// so that for large M and t near 1 a minimizer of f_t sits on (or very
// near) the feasible set while still ranking feasible points by f.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defopt/expr.hpp"

namespace defopt {

// Default tolerance below which a constraint violation counts as zero.
inline constexpr double kDefaultFeasibilityTol = 1e-6;

// Raised when a constraint evaluates to a non-finite value at a point
// where a finite violation measure was required.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& msg,
                           std::optional<int> constraint = std::nullopt)
      : std::runtime_error(msg), constraint_(constraint) {}

  // Index into the offending constraint family, when known.
  std::optional<int> constraint_index() const { return constraint_; }

 private:
  std::optional<int> constraint_;
};

// Axis-aligned box [lower[i], upper[i]] with strictly positive widths.
struct BoxDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  BoxDomain() = default;
  BoxDomain(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
      throw std::invalid_argument("box bounds differ in dimension");
    if (lower.empty()) throw std::invalid_argument("box must have dimension >= 1");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i]))
        throw std::invalid_argument("box requires lower < upper in component " +
                                    std::to_string(i + 1));
    }
  }

  int dimension() const { return static_cast<int>(lower.size()); }

  bool contains(std::span<const double> x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }

  // Componentwise projection onto the box.
  std::vector<double> clamp(std::span<const double> x) const {
    if (x.size() != lower.size())
      throw std::invalid_argument("point dimension does not match box");
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] < lower[i]) out[i] = lower[i];
      if (out[i] > upper[i]) out[i] = upper[i];
    }
    return out;
  }
};

// minimize objective(x) subject to equalities = 0, inequalities <= 0,
// x in domain. arity is the number of variables.
struct Problem {
  int arity = 0;
  Expr objective;
  std::vector<Expr> equalities;
  std::vector<Expr> inequalities;
  BoxDomain domain;

  // Throws std::invalid_argument when the pieces do not fit together.
  void validate() const {
    if (arity < 1) throw std::invalid_argument("problem needs at least one variable");
    if (domain.dimension() != arity)
      throw std::invalid_argument("domain dimension " +
                                  std::to_string(domain.dimension()) +
                                  " does not match arity " + std::to_string(arity));
    auto check = [&](const Expr& e, const std::string& what) {
      if (e.max_variable() > arity)
        throw std::invalid_argument(what + " references x" +
                                    std::to_string(e.max_variable()) +
                                    " but the problem has arity " +
                                    std::to_string(arity));
    };
    check(objective, "objective");
    for (std::size_t i = 0; i < equalities.size(); ++i)
      check(equalities[i], "equality constraint " + std::to_string(i + 1));
    for (std::size_t i = 0; i < inequalities.size(); ++i)
      check(inequalities[i], "inequality constraint " + std::to_string(i + 1));
  }
};

// F(x) = sum |g_i| + sum (|h_j| + h_j). Nonnegative, and zero iff x is
// feasible. A non-finite constraint value raises EvaluationError naming
// the constraint.
inline double feasibility_measure(const Problem& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.arity)
    throw std::invalid_argument("point has " + std::to_string(x.size()) +
                                " components but the problem has arity " +
                                std::to_string(p.arity));
  double total = 0.0;
  for (std::size_t i = 0; i < p.equalities.size(); ++i) {
    double g = p.equalities[i].eval(x);
    if (!std::isfinite(g))
      throw EvaluationError("equality constraint " + std::to_string(i + 1) +
                                " is non-finite at the given point",
                            static_cast<int>(i));
    total += std::fabs(g);
  }
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    double h = p.inequalities[j].eval(x);
    if (!std::isfinite(h))
      throw EvaluationError("inequality constraint " + std::to_string(j + 1) +
                                " is non-finite at the given point",
                            static_cast<int>(j));
    total += std::fabs(h) + h;
  }
  return total;
}

// Feasible means the constraint residuals clear the tolerance AND the
// point actually lies inside the box; a point outside the bounds is never
// feasible even if every constraint expression happens to vanish there.
inline bool is_feasible(const Problem& p, std::span<const double> x,
                        double tol = kDefaultFeasibilityTol) {
  double measure = feasibility_measure(p, x);
  return measure <= tol && p.domain.contains(x);
}

// Worst-case residuals for reporting: max |g_i| and max h_j, each absent
// when the corresponding constraint family is empty.
struct ConstraintReport {
  std::optional<double> max_eq_residual;
  std::optional<double> max_ineq_value;
};

inline ConstraintReport constraint_report(const Problem& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.arity)
    throw std::invalid_argument("point has " + std::to_string(x.size()) +
                                " components but the problem has arity " +
                                std::to_string(p.arity));
  ConstraintReport r;
  for (const Expr& g : p.equalities) {
    double v = std::fabs(g.eval(x));
    if (!r.max_eq_residual || v > *r.max_eq_residual) r.max_eq_residual = v;
  }
  for (const Expr& h : p.inequalities) {
    double v = h.eval(x);
    if (!r.max_ineq_value || v > *r.max_ineq_value) r.max_ineq_value = v;
  }
  return r;
}

// K, M and t in the deformation (1 - t) * (f - K) + t * M * F.
struct PenaltyParams {
  double shift = 100.0;     // K, recenters the objective before blending
  double weight = 10000.0;  // M, scales the constraint violation
  double blend = 0.95;      // t, how far to tilt toward feasibility

  void validate() const {
    if (!(blend > 0.0 && blend < 1.0))
      throw std::invalid_argument("blend parameter t must lie in (0, 1)");
    if (!(weight > 0.0)) throw std::invalid_argument("penalty weight M must be positive");
    if (!std::isfinite(shift)) throw std::invalid_argument("shift K must be finite");
  }
};

// The deformed objective as a plain callable. Any point where the
// objective or a constraint fails to produce a finite value maps to
// +infinity, so minimizers simply never keep such iterates.
class DeformedObjective {
 public:
  DeformedObjective(Problem problem, PenaltyParams params)
      : problem_(std::move(problem)), params_(params) {
    problem_.validate();
    params_.validate();
  }

  double operator()(std::span<const double> x) const {
    double f = problem_.objective.eval(x);
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    double violation;
    try {
      violation = feasibility_measure(problem_, x);
    } catch (const EvaluationError&) {
      return std::numeric_limits<double>::infinity();
    }
    double value = (1.0 - params_.blend) * (f - params_.shift) +
                   params_.blend * params_.weight * violation;
    if (!std::isfinite(value)) return std::numeric_limits<double>::infinity();
    return value;
  }

  const Problem& problem() const { return problem_; }
  const PenaltyParams& params() const { return params_; }

 private:
  Problem problem_;
  PenaltyParams params_;
};

inline DeformedObjective deform(Problem problem, PenaltyParams params = {}) {
  return DeformedObjective(std::move(problem), params);
}

}  // namespace defopt
