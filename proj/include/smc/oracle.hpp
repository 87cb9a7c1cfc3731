#pragma once

// Brute-force reference minimizers for tiny instances. Nothing here shares
// code with the ADMM solvers beyond the objective definition.

#include <cstdint>
#include <functional>
#include <vector>

#include "smc/matrix_core.hpp"
#include "smc/problem.hpp"

namespace smc {

struct SimplexResult {
  Vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead downhill simplex from `start` with initial edge `step`.
/// Stops when the simplex spread in f falls below `f_tol` or after
/// `max_evals` evaluations.
SimplexResult nelder_mead(const std::function<double(const Vector<double>&)>& f, const Vector<double>& start,
                          double step, int max_evals, double f_tol = 1e-14);

/// Multi-start Nelder-Mead with restarts from the incumbent at shrinking
/// step sizes. Extra starts are drawn from a fixed-seed stream.
SimplexResult polytope_search(const std::function<double(const Vector<double>&)>& f,
                              const std::vector<Vector<double>>& starts, double step, int restarts,
                              int evals_per_run);

struct OracleBudget {
  int grid_points = 201;      // per axis for 1 unknown; sqrt-scaled for 2
  double grid_resolution = 1e-9;
  int starts = 6;
  int restarts = 30;
  int evals_per_run = 20000;
};

/// Minimizes the exact objective of `p` over its free entries: the
/// unobserved entries for nnm-exact / nnm-reg, every entry otherwise (for
/// rpca-restricted the sparse part is S = P_obs(M) - A). One or two free
/// entries use a zooming grid; up to 16 use polytope_search.
/// Throws UnsupportedError beyond that budget.
SolveResult<double> oracle_solve(const CompletionProblem<double>& p, const OracleBudget& budget = {});

}  // namespace smc
