#include "smc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "smc/errors.hpp"
#include "smc/random.hpp"

namespace smc {

namespace {

constexpr std::uint64_t kOracleSeed = 0x6f7261636c65ULL;
constexpr Index kMaxSimplexUnknowns = 16;
constexpr Index kMaxGridUnknowns = 2;

using Objective = std::function<double(const Vector<double>&)>;

/// Zooming grid over 1 or 2 unknowns. For convex f the minimizer stays
/// within a cell or two of the grid argmin, so each pass shrinks the window
/// around it.
SimplexResult zoom_grid(const Objective& f, Index unknowns, double half_width, const OracleBudget& budget) {
  const int per_axis = unknowns == 1 ? budget.grid_points : std::max(21, budget.grid_points / 5) | 1;
  Vector<double> center = Vector<double>::Zero(unknowns);
  SimplexResult best{center, f(center), 1};
  double width = half_width;
  while (true) {
    const double h = 2.0 * width / (per_axis - 1);
    Vector<double> x(unknowns);
    Vector<double> pass_best = center;
    double pass_value = best.value;
    const int outer = unknowns == 2 ? per_axis : 1;
    for (int a = 0; a < per_axis; ++a) {
      x(0) = center(0) - width + a * h;
      for (int b = 0; b < outer; ++b) {
        if (unknowns == 2) x(1) = center(1) - width + b * h;
        const double v = f(x);
        ++best.evaluations;
        if (v < pass_value) {
          pass_value = v;
          pass_best = x;
        }
      }
    }
    center = pass_best;
    best.x = pass_best;
    best.value = pass_value;
    if (h < budget.grid_resolution) break;
    width = 3.0 * h;
  }
  return best;
}

}  // namespace

namespace {

SimplexResult run_simplex(const Objective& f, std::vector<Vector<double>> simplex, int max_evals, double f_tol) {
  const auto n = static_cast<Index>(simplex.size()) - 1;
  std::vector<double> values(n + 1);
  int evals = 0;
  for (Index i = 0; i <= n; ++i) {
    values[i] = f(simplex[i]);
    ++evals;
  }

  std::vector<Index> order(n + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] < values[b]; });
    const Index lo = order.front();
    const Index hi = order.back();
    const Index second = order[n - 1];
    if (values[hi] - values[lo] <= f_tol) break;

    Vector<double> centroid = Vector<double>::Zero(n);
    for (Index i = 0; i <= n; ++i)
      if (i != hi) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Vector<double> reflected = centroid + (centroid - simplex[hi]);
    const double fr = f(reflected);
    ++evals;
    if (fr < values[lo]) {
      const Vector<double> expanded = centroid + 2.0 * (centroid - simplex[hi]);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[hi] = expanded;
        values[hi] = fe;
      } else {
        simplex[hi] = reflected;
        values[hi] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[hi] = reflected;
      values[hi] = fr;
      continue;
    }
    const bool outside = fr < values[hi];
    const Vector<double> contracted =
        outside ? Vector<double>(centroid + 0.5 * (reflected - centroid))
                : Vector<double>(centroid + 0.5 * (simplex[hi] - centroid));
    const double fc = f(contracted);
    ++evals;
    if (fc < (outside ? fr : values[hi])) {
      simplex[hi] = contracted;
      values[hi] = fc;
      continue;
    }
    for (Index i = 0; i <= n; ++i) {
      if (i == lo) continue;
      simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
      values[i] = f(simplex[i]);
      ++evals;
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], evals};
}

/// Simplex around `start` with edges along random unit directions, so a
/// restart is not stuck with the same axis-aligned geometry at a kink.
std::vector<Vector<double>> rotated_simplex(const Vector<double>& start, double step, rng::Stream& s) {
  const Index n = start.size();
  std::vector<Vector<double>> simplex(n + 1, start);
  for (Index i = 0; i < n; ++i) {
    Vector<double> d(n);
    for (Index k = 0; k < n; ++k) d(k) = s.normal();
    simplex[i + 1] += step * d.normalized();
  }
  return simplex;
}

/// Objective with every kink rounded off at scale eps: |x| -> sqrt(x^2 + eps^2),
/// sigma -> sqrt(sigma^2 + eps^2), ||r||_F -> sqrt(||r||^2 + eps^2). Only
/// used to walk the simplex toward the minimizer; results are scored exactly.
double smoothed_objective(const CompletionProblem<double>& p, const MatrixXd& a, double eps) {
  const double e2 = eps * eps;
  const auto nuc = [&](const MatrixXd& m) { return (singular_values(m).array().square() + e2).sqrt().sum(); };
  const auto l1 = [&](const MatrixXd& m) { return (m.array().square() + e2).sqrt().sum(); };
  const auto fit = [&] { return std::sqrt(project(MatrixXd(p.observed() - a), p.mask()).squaredNorm() + e2); };
  const ObservationMask& mask = p.mask();
  switch (p.formulation()) {
    case Formulation::NnmExact: return nuc(a);
    case Formulation::NnmReg: return nuc(a) + p.alpha() * l1(project(a, complement(mask)));
    case Formulation::NnmNoisy: return fit() + p.rho() * nuc(a);
    case Formulation::NnmNoisyReg: return fit() + p.rho() * nuc(a) + p.alpha() * l1(project(a, complement(mask)));
    case Formulation::RpcaRestricted: return nuc(a) + p.alpha() * l1(MatrixXd(p.observed() - a));
  }
  return 0.0;
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, const Vector<double>& start, double step, int max_evals,
                          double f_tol) {
  std::vector<Vector<double>> simplex(start.size() + 1, start);
  for (Index i = 0; i < start.size(); ++i) simplex[i + 1](i) += step;
  return run_simplex(f, std::move(simplex), max_evals, f_tol);
}

SimplexResult polytope_search(const Objective& f, const std::vector<Vector<double>>& starts, double step,
                              int restarts, int evals_per_run) {
  SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    SimplexResult r = nelder_mead(f, s, step, evals_per_run);
    best.evaluations += r.evaluations;
    if (r.value < best.value) {
      best.x = r.x;
      best.value = r.value;
    }
  }
  // restart from the incumbent; a fresh simplex escapes the collapsed one
  rng::Stream directions(kOracleSeed ^ 0x726f74ULL);
  double s = step;
  int stalls = 0;
  for (int k = 0; k < restarts; ++k) {
    SimplexResult r = run_simplex(f, rotated_simplex(best.x, s, directions), evals_per_run, 1e-14);
    best.evaluations += r.evaluations;
    if (r.value < best.value - 1e-15) {
      best.x = r.x;
      best.value = r.value;
      stalls = 0;
    } else if (++stalls % 3 == 0) {
      s *= 0.5;
    }
  }
  return best;
}

SolveResult<double> oracle_solve(const CompletionProblem<double>& p, const OracleBudget& budget) {
  const MatrixXd& obs = p.observed();
  const bool pinned = has_observation_constraint(p.formulation());

  std::vector<ObservationMask::Entry> free_entries;
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.cols(); ++j)
      if (!pinned || !p.mask().contains(i, j)) free_entries.emplace_back(i, j);
  const auto unknowns = static_cast<Index>(free_entries.size());

  const auto assemble = [&](const Vector<double>& x) {
    MatrixXd a = obs;
    for (Index k = 0; k < unknowns; ++k) a(free_entries[k].first, free_entries[k].second) = x(k);
    return a;
  };
  const Objective f = [&](const Vector<double>& x) { return objective(p, assemble(x)); };

  SolveResult<double> out;
  out.status = SolveStatus::Converged;
  if (unknowns == 0) {
    out.completed = obs;
    out.objective = objective(p, obs);
    out.rank_estimate = numerical_rank<double>(singular_values(obs), 1e-6);
    return out;
  }
  if (unknowns > kMaxSimplexUnknowns && unknowns > kMaxGridUnknowns)
    throw UnsupportedError("oracle_solve: " + std::to_string(unknowns) + " free entries exceeds the budget of " +
                           std::to_string(kMaxSimplexUnknowns));

  const double scale = std::max(1.0, obs.cwiseAbs().maxCoeff());
  SimplexResult best;
  if (unknowns <= kMaxGridUnknowns) {
    best = zoom_grid(f, unknowns, 4.0 * scale, budget);
    // polish: a diagonal valley can fool a coarse grid in two dimensions
    const SimplexResult polished = polytope_search(f, {best.x}, 1e-3 * scale, budget.restarts, budget.evals_per_run);
    best.evaluations += polished.evaluations;
    if (polished.value < best.value) {
      best.x = polished.x;
      best.value = polished.value;
    }
  } else {
    std::vector<Vector<double>> starts;
    Vector<double> from_obs(unknowns);
    for (Index k = 0; k < unknowns; ++k) from_obs(k) = obs(free_entries[k].first, free_entries[k].second);
    starts.push_back(from_obs);
    starts.push_back(Vector<double>::Zero(unknowns));
    rng::Stream stream(kOracleSeed);
    for (int s = 2; s < budget.starts; ++s) {
      Vector<double> x(unknowns);
      for (Index k = 0; k < unknowns; ++k) x(k) = scale * (2.0 * stream.uniform() - 1.0);
      starts.push_back(x);
    }
    // continuation on the smoothed objective gives one more, well-placed start
    Vector<double> x = from_obs;
    for (double eps = 0.1 * scale; eps > 1e-7 * scale; eps *= 0.1) {
      const Objective smooth = [&](const Vector<double>& v) { return smoothed_objective(p, assemble(v), eps); };
      x = polytope_search(smooth, {x}, std::max(eps, 1e-3 * scale), 4, budget.evals_per_run).x;
    }
    starts.push_back(x);
    best = polytope_search(f, starts, 0.5 * scale, budget.restarts, budget.evals_per_run);
  }

  out.completed = assemble(best.x);
  out.objective = best.value;
  out.iterations = best.evaluations;
  out.rank_estimate = numerical_rank<double>(singular_values(out.completed), 1e-6);
  return out;
}

}  // namespace smc
