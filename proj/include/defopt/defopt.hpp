#pragma once

// Umbrella header: the expression language, problem model, penalty
// deformation, the three solvers, the application builders, and the
// benchmark harness.

#include "defopt/applications.hpp"
#include "defopt/bench.hpp"
#include "defopt/expr.hpp"
#include "defopt/parse.hpp"
#include "defopt/problem.hpp"
#include "defopt/rng.hpp"
#include "defopt/solvers.hpp"
