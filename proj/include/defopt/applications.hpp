#pragma once

// Builders that reduce two families of tasks to constrained minimization:
// finding fixed points of a self-map of a box, and scalar replacements for
// multi-objective problems (sum form, threshold form, target-value form).

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defopt/problem.hpp"
#include "defopt/rng.hpp"

namespace defopt {

// A map T = (T_1, ..., T_p) from a box into p-space, intended (but not
// verified) to send the box into itself.
struct SelfMap {
  std::vector<Expr> components;
  BoxDomain domain;

  int arity() const { return domain.dimension(); }

  void validate() const {
    if (components.size() != static_cast<std::size_t>(domain.dimension()))
      throw std::invalid_argument("self-map has " + std::to_string(components.size()) +
                                  " components for a box of dimension " +
                                  std::to_string(domain.dimension()));
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (components[i].max_variable() > domain.dimension())
        throw std::invalid_argument("map component " + std::to_string(i + 1) +
                                    " references x" +
                                    std::to_string(components[i].max_variable()) +
                                    " outside the box dimension");
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(components.size());
    for (const Expr& c : components) out.push_back(c.eval(x));
    return out;
  }
};

// Fixed points of T become the feasible set of a pure feasibility problem:
// constant objective 1 with equalities T_i(x) - x_i = 0.
inline Problem brouwer_problem(const SelfMap& map) {
  map.validate();
  Problem p;
  p.arity = map.arity();
  p.objective = Expr::constant(1.0);
  for (int i = 0; i < p.arity; ++i)
    p.equalities.push_back(map.components[static_cast<std::size_t>(i)] -
                           Expr::variable(i + 1));
  p.domain = map.domain;
  p.validate();
  return p;
}

// max_i |T_i(x) - x_i|; zero exactly at fixed points.
inline double fixed_point_residual(const SelfMap& map, std::span<const double> x) {
  map.validate();
  if (x.size() != static_cast<std::size_t>(map.arity()))
    throw std::invalid_argument("point dimension does not match the self-map");
  double worst = 0.0;
  for (std::size_t i = 0; i < map.components.size(); ++i) {
    double r = std::fabs(map.components[i].eval(x) - x[i]);
    if (r > worst) worst = r;
  }
  return worst;
}

// Result of spot-checking whether T maps sampled box points back into the
// box. A nonzero escape count means T is not actually a self-map (or only
// barely fails at the sampled points); witness holds one offending input.
struct ContainmentSample {
  int checked = 0;
  int escaped = 0;
  std::vector<double> witness;
};

inline ContainmentSample sample_containment(const SelfMap& map, int samples,
                                            std::uint64_t seed) {
  map.validate();
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  Rng rng(seed);
  ContainmentSample out;
  out.checked = samples;
  const int p = map.arity();
  std::vector<double> x(static_cast<std::size_t>(p));
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < p; ++i)
      x[static_cast<std::size_t>(i)] =
          rng.uniform(map.domain.lower[static_cast<std::size_t>(i)],
                      map.domain.upper[static_cast<std::size_t>(i)]);
    std::vector<double> image = map.apply(x);
    bool inside = map.domain.contains(image);
    for (double v : image)
      if (!std::isfinite(v)) inside = false;
    if (!inside) {
      ++out.escaped;
      if (out.witness.empty()) out.witness = x;
    }
  }
  return out;
}

// Sum scalarization: one problem whose objective is f_1 + ... + f_k built
// as a left-leaning chain of sums, with the constraint lists passed through.
inline Problem scalarize_sum(std::vector<Expr> objectives, std::vector<Expr> equalities,
                             std::vector<Expr> inequalities, BoxDomain domain) {
  if (objectives.empty())
    throw std::invalid_argument("sum scalarization needs at least one objective");
  Expr total = objectives.front();
  for (std::size_t i = 1; i < objectives.size(); ++i) total = total + objectives[i];
  Problem p;
  p.arity = domain.dimension();
  p.objective = std::move(total);
  p.equalities = std::move(equalities);
  p.inequalities = std::move(inequalities);
  p.domain = std::move(domain);
  p.validate();
  return p;
}

// Threshold scalarization: ask only for a point where every f_i stays at or
// below its cap, on top of whatever base constraints were already present.
struct ThresholdSpec {
  std::vector<Expr> objectives;
  std::vector<double> caps;
  std::vector<Expr> equalities;    // base g's, may be empty
  std::vector<Expr> inequalities;  // base h's, may be empty
  BoxDomain domain;

  void validate() const {
    if (caps.size() != objectives.size())
      throw std::invalid_argument("threshold spec has " + std::to_string(caps.size()) +
                                  " caps for " + std::to_string(objectives.size()) +
                                  " objectives");
  }
};

inline Problem threshold_problem(const ThresholdSpec& spec) {
  spec.validate();
  Problem p;
  p.arity = spec.domain.dimension();
  p.objective = Expr::constant(1.0);
  p.equalities = spec.equalities;
  p.inequalities = spec.inequalities;
  for (std::size_t i = 0; i < spec.objectives.size(); ++i)
    p.inequalities.push_back(spec.objectives[i] - Expr::constant(spec.caps[i]));
  p.domain = spec.domain;
  p.validate();
  return p;
}

// Target-value form: replace "minimize f" by "find x with f(x) <= c".
inline Problem target_value_problem(const Problem& problem, double c) {
  problem.validate();
  Problem p = problem;
  p.inequalities.push_back(problem.objective - Expr::constant(c));
  p.objective = Expr::constant(1.0);
  return p;
}

}  // namespace defopt
