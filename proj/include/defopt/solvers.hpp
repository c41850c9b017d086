#pragma once

// Three minimizers for a scalar field over a box: global-best particle
// swarm, compass pattern search, and projected descent driven by a
// finite-difference gradient. All three are deterministic given their
// inputs (the swarm through an explicit seed), score non-finite field
// values as +infinity so such iterates are never kept, and report a
// monotone best-so-far history.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defopt/problem.hpp"
#include "defopt/rng.hpp"

namespace defopt {

using ScalarField = std::function<double(std::span<const double>)>;

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class SolverKind { Pso, Pattern, Descent };

inline const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Pso: return "pso";
    case SolverKind::Pattern: return "pattern";
    case SolverKind::Descent: return "descent";
  }
  return "?";
}

inline SolverKind parse_solver_kind(std::string_view name) {
  if (name == "pso") return SolverKind::Pso;
  if (name == "pattern") return SolverKind::Pattern;
  if (name == "descent") return SolverKind::Descent;
  throw std::invalid_argument("unknown solver '" + std::string(name) +
                              "' (expected pso, pattern or descent)");
}

struct PsoConfig {
  int swarm_size = 100;
  int max_iters = 2000;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  std::uint64_t seed = 0;

  void validate() const {
    if (swarm_size < 2) throw std::invalid_argument("swarm size must be at least 2");
    if (max_iters < 1) throw std::invalid_argument("iteration budget must be positive");
    if (!(inertia >= 0.0 && inertia < 1.0))
      throw std::invalid_argument("inertia must lie in [0, 1)");
    if (!(cognitive >= 0.0) || !(social >= 0.0))
      throw std::invalid_argument("acceleration coefficients must be nonnegative");
  }
};

struct PatternConfig {
  double initial_mesh = 1.0;
  double contraction = 0.5;
  double expansion = 2.0;
  double mesh_tol = 1e-8;
  int max_iters = 100000;

  void validate() const {
    if (!(initial_mesh > 0.0)) throw std::invalid_argument("initial mesh must be positive");
    if (!(contraction > 0.0 && contraction < 1.0))
      throw std::invalid_argument("contraction factor must lie in (0, 1)");
    if (!(expansion >= 1.0)) throw std::invalid_argument("expansion factor must be >= 1");
    if (!(mesh_tol > 0.0)) throw std::invalid_argument("mesh tolerance must be positive");
    if (!(mesh_tol < initial_mesh))
      throw std::invalid_argument("mesh tolerance must be below the initial mesh");
    if (max_iters < 1) throw std::invalid_argument("iteration budget must be positive");
  }
};

struct DescentConfig {
  double fd_step = 1e-6;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  double grad_tol = 1e-8;
  int max_iters = 50000;

  void validate() const {
    if (!(fd_step > 0.0)) throw std::invalid_argument("difference step must be positive");
    if (!(initial_step > 0.0)) throw std::invalid_argument("initial step must be positive");
    if (!(backtrack > 0.0 && backtrack < 1.0))
      throw std::invalid_argument("backtracking factor must lie in (0, 1)");
    if (!(armijo > 0.0 && armijo < 1.0))
      throw std::invalid_argument("sufficient-decrease constant must lie in (0, 1)");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("gradient tolerance must be positive");
    if (max_iters < 1) throw std::invalid_argument("iteration budget must be positive");
  }
};

struct RunResult {
  std::vector<double> best_point;
  double best_value = std::numeric_limits<double>::infinity();
  int iterations_used = 0;
  long long evaluations_used = 0;
  // (iteration, best-so-far) samples, recorded at every improvement; the
  // value column is non-increasing by construction.
  std::vector<std::pair<int, double>> history;
  // Set only by the descent solver when its line search gives up.
  bool stalled = false;
};

namespace detail {

// Non-finite scores become +infinity so comparisons always reject them.
inline double score(const ScalarField& field, std::span<const double> x) {
  double v = field(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

inline void require_inside(const BoxDomain& domain, std::span<const double> start) {
  if (start.size() != static_cast<std::size_t>(domain.dimension()))
    throw std::invalid_argument("start point dimension does not match the box");
  if (!domain.contains(start))
    throw std::invalid_argument("start point lies outside the box");
}

}  // namespace detail

// Central differences per coordinate. When one side evaluates non-finite
// the one-sided quotient through the center value is used instead; if no
// finite quotient can be formed the component is unrecoverable.
inline std::vector<double> finite_difference_gradient(const ScalarField& field,
                                                      std::span<const double> point,
                                                      double h) {
  if (!(h > 0.0)) throw std::invalid_argument("difference step must be positive");
  std::vector<double> grad(point.size());
  std::vector<double> probe(point.begin(), point.end());
  bool have_center = false;
  double center = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + h;
    double fp = field(probe);
    probe[i] = point[i] - h;
    double fm = field(probe);
    probe[i] = point[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      grad[i] = (fp - fm) / (2.0 * h);
      continue;
    }
    if (!have_center) {
      center = field(point);
      have_center = true;
    }
    if (std::isfinite(center) && std::isfinite(fp)) {
      grad[i] = (fp - center) / h;
    } else if (std::isfinite(center) && std::isfinite(fm)) {
      grad[i] = (center - fm) / h;
    } else {
      throw EvaluationError("no finite difference quotient in component " +
                                std::to_string(i + 1),
                            static_cast<int>(i));
    }
  }
  return grad;
}

// Global-best particle swarm. Positions start uniform over the box (drawn
// particle-major, component-minor, from the seeded generator), velocities
// start at zero. Each generation updates every particle against the
// previous generation's global best, then reduces pbest/gbest in particle
// index order, which keeps results bit-identical run to run.
//
// The cognitive and social coefficients are drawn once per particle per
// generation and applied to every component. Keeping one draw per pull
// means each move stays inside the span of (pbest - x) and (gbest - x),
// so once the memory points straddle a thin valley of the field (penalty
// methods produce exactly those), new samples land along the valley
// instead of scattering off it. Independent per-component draws stall
// measurably on such valleys; see the narrow-valley solver test.
inline RunResult pso_minimize(const ScalarField& field, const BoxDomain& domain,
                              const PsoConfig& config) {
  config.validate();
  const int p = domain.dimension();
  const int n = config.swarm_size;
  Rng rng(config.seed);

  std::vector<std::vector<double>> pos(static_cast<std::size_t>(n)),
      vel(static_cast<std::size_t>(n)), pbest(static_cast<std::size_t>(n));
  std::vector<double> pbest_val(static_cast<std::size_t>(n));
  RunResult result;

  for (int i = 0; i < n; ++i) {
    auto& x = pos[static_cast<std::size_t>(i)];
    x.resize(static_cast<std::size_t>(p));
    for (int d = 0; d < p; ++d)
      x[static_cast<std::size_t>(d)] =
          rng.uniform(domain.lower[static_cast<std::size_t>(d)],
                      domain.upper[static_cast<std::size_t>(d)]);
    vel[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(p), 0.0);
    pbest[static_cast<std::size_t>(i)] = x;
    pbest_val[static_cast<std::size_t>(i)] = detail::score(field, x);
    ++result.evaluations_used;
  }

  int best_idx = 0;
  for (int i = 1; i < n; ++i)
    if (pbest_val[static_cast<std::size_t>(i)] < pbest_val[static_cast<std::size_t>(best_idx)])
      best_idx = i;
  std::vector<double> gbest = pbest[static_cast<std::size_t>(best_idx)];
  double gbest_val = pbest_val[static_cast<std::size_t>(best_idx)];
  if (!std::isfinite(gbest_val))
    throw SolverError("field is non-finite across the entire initial swarm");
  result.history.emplace_back(0, gbest_val);

  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      auto& x = pos[static_cast<std::size_t>(i)];
      auto& v = vel[static_cast<std::size_t>(i)];
      const auto& pb = pbest[static_cast<std::size_t>(i)];
      double r1 = rng.uniform01();
      double r2 = rng.uniform01();
      for (int d = 0; d < p; ++d) {
        auto di = static_cast<std::size_t>(d);
        v[di] = config.inertia * v[di] + config.cognitive * r1 * (pb[di] - x[di]) +
                config.social * r2 * (gbest[di] - x[di]);
        x[di] += v[di];
        if (x[di] < domain.lower[di]) x[di] = domain.lower[di];
        if (x[di] > domain.upper[di]) x[di] = domain.upper[di];
      }
      scores[static_cast<std::size_t>(i)] = detail::score(field, x);
      ++result.evaluations_used;
    }
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      auto si = static_cast<std::size_t>(i);
      if (scores[si] < pbest_val[si]) {
        pbest_val[si] = scores[si];
        pbest[si] = pos[si];
        if (scores[si] < gbest_val) {
          gbest_val = scores[si];
          gbest = pos[si];
          improved = true;
        }
      }
    }
    if (improved) result.history.emplace_back(iter, gbest_val);
    result.iterations_used = iter;
  }

  result.best_point = std::move(gbest);
  result.best_value = gbest_val;
  return result;
}

// Compass search: poll the 2p points x +- mesh * e_i in the fixed order
// +e1, -e1, +e2, ..., clamped to the box, and move to the first poll point
// that strictly improves. The mesh doubles after a success (never past its
// initial size) and halves after a full poll with no improvement; the run
// stops when the mesh drops below mesh_tol.
inline RunResult pattern_search_minimize(const ScalarField& field, const BoxDomain& domain,
                                         std::span<const double> start,
                                         const PatternConfig& config) {
  config.validate();
  detail::require_inside(domain, start);
  const int p = domain.dimension();

  RunResult result;
  std::vector<double> x(start.begin(), start.end());
  double fx = detail::score(field, x);
  ++result.evaluations_used;
  result.history.emplace_back(0, fx);

  double mesh = config.initial_mesh;
  std::vector<double> probe(x);
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (mesh < config.mesh_tol) break;
    bool moved = false;
    for (int d = 0; d < p && !moved; ++d) {
      auto di = static_cast<std::size_t>(d);
      for (double sign : {1.0, -1.0}) {
        probe = x;
        probe[di] += sign * mesh;
        if (probe[di] < domain.lower[di]) probe[di] = domain.lower[di];
        if (probe[di] > domain.upper[di]) probe[di] = domain.upper[di];
        double fp = detail::score(field, probe);
        ++result.evaluations_used;
        if (fp < fx) {
          x = probe;
          fx = fp;
          moved = true;
          result.history.emplace_back(iter, fx);
          break;
        }
      }
    }
    mesh = moved ? std::min(mesh * config.expansion, config.initial_mesh)
                 : mesh * config.contraction;
    result.iterations_used = iter;
  }

  result.best_point = std::move(x);
  result.best_value = fx;
  return result;
}

// Projected descent. The search direction is the negative finite-difference
// gradient; steps are clamped to the box and accepted under an Armijo-style
// sufficient decrease f(y) <= f(x) - c * g.(x - y), which reduces to the
// classical condition when no bound is active. Termination is on the norm
// of the unit-step projected gradient x - clamp(x - g).
inline RunResult descent_minimize(const ScalarField& field, const BoxDomain& domain,
                                  std::span<const double> start,
                                  const DescentConfig& config) {
  constexpr int kMaxHalvings = 60;
  config.validate();
  detail::require_inside(domain, start);
  const int p = domain.dimension();

  RunResult result;
  std::vector<double> x(start.begin(), start.end());
  double fx = field(x);
  ++result.evaluations_used;
  if (!std::isfinite(fx))
    throw std::invalid_argument("field is not finite at the start point");
  result.history.emplace_back(0, fx);

  std::vector<double> y(static_cast<std::size_t>(p));
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    result.iterations_used = iter;
    std::vector<double> grad = finite_difference_gradient(field, x, config.fd_step);
    result.evaluations_used += 2 * p;

    double pg_norm2 = 0.0;
    for (int d = 0; d < p; ++d) {
      auto di = static_cast<std::size_t>(d);
      double stepped = x[di] - grad[di];
      if (stepped < domain.lower[di]) stepped = domain.lower[di];
      if (stepped > domain.upper[di]) stepped = domain.upper[di];
      double pg = x[di] - stepped;
      pg_norm2 += pg * pg;
    }
    if (std::sqrt(pg_norm2) < config.grad_tol) break;

    double alpha = config.initial_step;
    int halvings = 0;
    bool accepted = false;
    while (true) {
      double decrease = 0.0;
      for (int d = 0; d < p; ++d) {
        auto di = static_cast<std::size_t>(d);
        double stepped = x[di] - alpha * grad[di];
        if (stepped < domain.lower[di]) stepped = domain.lower[di];
        if (stepped > domain.upper[di]) stepped = domain.upper[di];
        y[di] = stepped;
        decrease += grad[di] * (x[di] - stepped);
      }
      // decrease > 0 exactly when y differs from x; once alpha underflows the
      // clamped step to a null move the halving must count as a failure or the
      // loop would accept f(x) <= f(x) forever without progress.
      double fy = detail::score(field, y);
      ++result.evaluations_used;
      if (decrease > 0.0 && fy <= fx - config.armijo * decrease) {
        if (fy < fx) result.history.emplace_back(iter, fy);
        x = y;
        fx = fy;
        accepted = true;
        break;
      }
      if (++halvings >= kMaxHalvings) break;
      alpha *= config.backtrack;
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }
  }

  result.best_point = std::move(x);
  result.best_value = fx;
  return result;
}

}  // namespace defopt
