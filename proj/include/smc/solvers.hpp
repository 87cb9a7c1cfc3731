#pragma once

// Operator-splitting solvers. Every term of every formulation has a
// closed-form prox (see prox.hpp), so each iteration is a handful of prox
// evaluations and no inner solves are needed.
//
// Scaled-form ADMM on  min f(X) + g(Z)  s.t. X = Z:
//   X <- prox_{f/pen}(Z - U)
//   Z <- prox_{g/pen}(X + U)
//   U <- U + X - Z
// with primal residual ||X - Z||_F and dual residual pen * ||Z - Z_prev||_F.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "smc/matrix_core.hpp"
#include "smc/problem.hpp"
#include "smc/prox.hpp"

namespace smc {

namespace detail {

constexpr double kRankCutoff = 1e-6;
constexpr double kBalanceRatio = 10.0;
constexpr double kBalanceFactor = 2.0;

template <typename Scalar>
Index rank_estimate(const Matrix<Scalar>& m) {
  return numerical_rank<Scalar>(singular_values(m), Scalar(kRankCutoff));
}

/// Shared bookkeeping: residual history, stopping test, residual balancing.
template <typename Scalar>
class AdmmMonitor {
 public:
  AdmmMonitor(const SolverConfig& cfg, Index rows, Index cols)
      : cfg_(cfg),
        penalty_(Scalar(cfg.admm_penalty)),
        primal_tol_(Scalar(cfg.primal_tol) * std::sqrt(Scalar(rows * cols))),
        dual_tol_(Scalar(cfg.dual_tol) * std::sqrt(Scalar(rows * cols))) {
    cfg.validate();
  }

  Scalar penalty() const { return penalty_; }

  /// Records one iteration. Returns true when both residuals are within
  /// tolerance.
  bool record(Scalar primal, Scalar dual) {
    primal_ = primal;
    dual_ = dual;
    primal_history_.push_back(primal);
    dual_history_.push_back(dual);
    return primal <= primal_tol_ && dual <= dual_tol_;
  }

  /// Residual balancing. Returns the factor the scaled duals must be
  /// multiplied by (1 when the penalty is unchanged).
  Scalar rebalance(int iteration) {
    // adaptation stops halfway so the tail runs at a fixed penalty
    if (!cfg_.adaptive_penalty || iteration >= cfg_.max_iters / 2) return Scalar(1);
    if (primal_ > Scalar(kBalanceRatio) * dual_) {
      penalty_ *= Scalar(kBalanceFactor);
      return Scalar(1) / Scalar(kBalanceFactor);
    }
    if (dual_ > Scalar(kBalanceRatio) * primal_) {
      penalty_ /= Scalar(kBalanceFactor);
      return Scalar(kBalanceFactor);
    }
    return Scalar(1);
  }

  void finish(SolveResult<Scalar>& r, int iterations, bool converged) {
    r.iterations = iterations;
    r.primal_residual = primal_;
    r.dual_residual = dual_;
    r.status = converged ? SolveStatus::Converged : SolveStatus::MaxIters;
    r.final_penalty = penalty_;
    r.primal_history = std::move(primal_history_);
    r.dual_history = std::move(dual_history_);
  }

 private:
  const SolverConfig& cfg_;
  Scalar penalty_;
  Scalar primal_tol_;
  Scalar dual_tol_;
  Scalar primal_ = Scalar(0);
  Scalar dual_ = Scalar(0);
  std::vector<Scalar> primal_history_;
  std::vector<Scalar> dual_history_;
};

template <typename Scalar>
using Prox = std::function<Matrix<Scalar>(const Matrix<Scalar>&, Scalar penalty)>;

template <typename Scalar>
void check_formulation(const CompletionProblem<Scalar>& p, Formulation expected, const char* op) {
  if (p.formulation() != expected)
    throw std::invalid_argument(std::string(op) + ": problem formulation is " +
                                std::string(to_string(p.formulation())) + ", expected " +
                                std::string(to_string(expected)));
}

template <typename Scalar>
SolveResult<Scalar> numerical_failure(const CompletionProblem<Scalar>& p, const std::string& what,
                                      int iterations) {
  SolveResult<Scalar> r;
  r.completed = p.observed();
  r.objective = std::numeric_limits<Scalar>::quiet_NaN();
  r.iterations = iterations;
  r.status = SolveStatus::NumericalFailure;
  r.message = what;
  return r;
}

/// Two-block consensus ADMM. `candidates` picks which iterates may be
/// returned: the one with the lowest objective wins (ties go to Z).
template <typename Scalar>
SolveResult<Scalar> admm_two_block(const CompletionProblem<Scalar>& p, const SolverConfig& cfg,
                                   const Prox<Scalar>& prox_f, const Prox<Scalar>& prox_g, bool x_is_candidate) {
  AdmmMonitor<Scalar> monitor(cfg, p.rows(), p.cols());
  Matrix<Scalar> x = p.observed();
  Matrix<Scalar> z = p.observed();
  Matrix<Scalar> u = Matrix<Scalar>::Zero(p.rows(), p.cols());
  bool converged = false;
  int k = 0;
  try {
    while (k < cfg.max_iters) {
      ++k;
      x = prox_f(z - u, monitor.penalty());
      Matrix<Scalar> z_next = prox_g(x + u, monitor.penalty());
      u += x - z_next;
      const Scalar primal = (x - z_next).norm();
      const Scalar dual = monitor.penalty() * (z_next - z).norm();
      z = std::move(z_next);
      if (!u.allFinite() || !z.allFinite()) throw NumericalError("non-finite iterate");
      if ((converged = monitor.record(primal, dual))) break;
      u *= monitor.rebalance(k);
    }
  } catch (const NumericalError& e) {
    return numerical_failure(p, e.what(), k);
  }

  SolveResult<Scalar> r;
  r.completed = z;
  r.objective = objective(p, z);
  if (x_is_candidate) {
    const Scalar fx = objective(p, x);
    if (fx < r.objective) {
      r.completed = x;
      r.objective = fx;
    }
  }
  r.rank_estimate = rank_estimate(r.completed);
  monitor.finish(r, k, converged);
  return r;
}

}  // namespace detail

/// min ||A||_*  s.t.  P_obs(A) = P_obs(M).
/// f = nuclear norm (svt), g = indicator of the observation constraint.
template <typename Scalar>
SolveResult<Scalar> solve_nnm_exact(const CompletionProblem<Scalar>& p, const SolverConfig& cfg = {}) {
  detail::check_formulation(p, Formulation::NnmExact, "solve_nnm_exact");
  const auto& obs = p.observed();
  const auto& mask = p.mask();
  return detail::admm_two_block<Scalar>(
      p, cfg, [](const Matrix<Scalar>& v, Scalar pen) { return svt(v, Scalar(1) / pen); },
      [&](const Matrix<Scalar>& v, Scalar) { return enforce_observed(v, obs, mask); }, false);
}

/// min ||A||_* + alpha ||P_un(A)||_1  s.t.  P_obs(A) = P_obs(M).
/// g combines the L1 term on unobserved entries with the constraint; the two
/// act on disjoint supports so their proxes compose.
template <typename Scalar>
SolveResult<Scalar> solve_nnm_reg(const CompletionProblem<Scalar>& p, const SolverConfig& cfg = {}) {
  detail::check_formulation(p, Formulation::NnmReg, "solve_nnm_reg");
  const auto& obs = p.observed();
  const auto& mask = p.mask();
  const ObservationMask unobserved = complement(mask);
  const Scalar alpha = p.alpha();
  return detail::admm_two_block<Scalar>(
      p, cfg, [](const Matrix<Scalar>& v, Scalar pen) { return svt(v, Scalar(1) / pen); },
      [&](const Matrix<Scalar>& v, Scalar pen) {
        if (unobserved.empty()) return enforce_observed(v, obs, mask);
        return enforce_observed(soft_threshold(v, alpha / pen, unobserved), obs, mask);
      },
      false);
}

/// min ||P_obs(M - A)||_F + rho ||A||_*.
template <typename Scalar>
SolveResult<Scalar> solve_nnm_noisy(const CompletionProblem<Scalar>& p, const SolverConfig& cfg = {}) {
  detail::check_formulation(p, Formulation::NnmNoisy, "solve_nnm_noisy");
  const auto& obs = p.observed();
  const auto& mask = p.mask();
  const Scalar rho = p.rho();
  return detail::admm_two_block<Scalar>(
      p, cfg, [&](const Matrix<Scalar>& v, Scalar pen) { return prox_obs_fit(v, obs, mask, Scalar(1) / pen); },
      [&](const Matrix<Scalar>& v, Scalar pen) { return svt(v, rho / pen); }, true);
}

/// min ||P_obs(M - A)||_F + rho ||A||_* + alpha ||P_un(A)||_1.
/// Three-term consensus ADMM:
///   X_k <- prox_{f_k/pen}(Z - U_k),  Z <- mean(X_k + U_k),  U_k <- U_k + X_k - Z.
template <typename Scalar>
SolveResult<Scalar> solve_nnm_noisy_reg(const CompletionProblem<Scalar>& p, const SolverConfig& cfg = {}) {
  detail::check_formulation(p, Formulation::NnmNoisyReg, "solve_nnm_noisy_reg");
  const auto& obs = p.observed();
  const auto& mask = p.mask();
  const ObservationMask unobserved = complement(mask);
  const Scalar rho = p.rho();
  const Scalar alpha = p.alpha();

  const std::vector<detail::Prox<Scalar>> proxes = {
      [&](const Matrix<Scalar>& v, Scalar pen) { return prox_obs_fit(v, obs, mask, Scalar(1) / pen); },
      [&](const Matrix<Scalar>& v, Scalar pen) { return svt(v, rho / pen); },
      [&](const Matrix<Scalar>& v, Scalar pen) {
        return unobserved.empty() ? v : soft_threshold(v, alpha / pen, unobserved);
      },
  };
  const auto blocks = static_cast<Scalar>(proxes.size());

  detail::AdmmMonitor<Scalar> monitor(cfg, p.rows(), p.cols());
  std::vector<Matrix<Scalar>> x(proxes.size(), obs);
  std::vector<Matrix<Scalar>> u(proxes.size(), Matrix<Scalar>::Zero(p.rows(), p.cols()));
  Matrix<Scalar> z = obs;
  bool converged = false;
  int k = 0;
  try {
    while (k < cfg.max_iters) {
      ++k;
      Matrix<Scalar> z_next = Matrix<Scalar>::Zero(p.rows(), p.cols());
      for (std::size_t b = 0; b < proxes.size(); ++b) {
        x[b] = proxes[b](z - u[b], monitor.penalty());
        z_next += x[b] + u[b];
      }
      z_next /= blocks;
      Scalar primal_sq = 0;
      for (std::size_t b = 0; b < proxes.size(); ++b) {
        u[b] += x[b] - z_next;
        primal_sq += (x[b] - z_next).squaredNorm();
      }
      const Scalar dual = monitor.penalty() * std::sqrt(blocks) * (z_next - z).norm();
      z = std::move(z_next);
      if (!z.allFinite()) throw NumericalError("non-finite iterate");
      if ((converged = monitor.record(std::sqrt(primal_sq), dual))) break;
      const Scalar scale = monitor.rebalance(k);
      if (scale != Scalar(1))
        for (auto& ub : u) ub *= scale;
    }
  } catch (const NumericalError& e) {
    return detail::numerical_failure(p, e.what(), k);
  }

  SolveResult<Scalar> r;
  r.completed = z;
  r.objective = objective(p, z);
  for (const auto& xb : x) {
    const Scalar f = objective(p, xb);
    if (f < r.objective) {
      r.completed = xb;
      r.objective = f;
    }
  }
  r.rank_estimate = detail::rank_estimate(r.completed);
  monitor.finish(r, k, converged);
  return r;
}

/// min ||A||_* + alpha ||S||_1  s.t.  A + S = P_obs(M).
///   A <- svt(D - S - U, 1/pen)
///   S <- soft(D - A - U, alpha/pen)
///   U <- U + A + S - D
template <typename Scalar>
RpcaResult<Scalar> solve_rpca_restricted(const CompletionProblem<Scalar>& p, const SolverConfig& cfg = {}) {
  detail::check_formulation(p, Formulation::RpcaRestricted, "solve_rpca_restricted");
  const Matrix<Scalar>& data = p.observed();
  const ObservationMask everywhere = ObservationMask::full(p.rows(), p.cols());
  const Scalar alpha = p.alpha();

  detail::AdmmMonitor<Scalar> monitor(cfg, p.rows(), p.cols());
  Matrix<Scalar> a = data;
  Matrix<Scalar> s = Matrix<Scalar>::Zero(p.rows(), p.cols());
  Matrix<Scalar> u = Matrix<Scalar>::Zero(p.rows(), p.cols());
  bool converged = false;
  int k = 0;
  try {
    while (k < cfg.max_iters) {
      ++k;
      a = svt(data - s - u, Scalar(1) / monitor.penalty());
      Matrix<Scalar> s_next = soft_threshold(data - a - u, alpha / monitor.penalty(), everywhere);
      const Matrix<Scalar> gap = a + s_next - data;
      u += gap;
      const Scalar primal = gap.norm();
      const Scalar dual = monitor.penalty() * (s_next - s).norm();
      s = std::move(s_next);
      if (!u.allFinite() || !a.allFinite()) throw NumericalError("non-finite iterate");
      if ((converged = monitor.record(primal, dual))) break;
      u *= monitor.rebalance(k);
    }
  } catch (const NumericalError& e) {
    RpcaResult<Scalar> failed{detail::numerical_failure(p, e.what(), k), Matrix<Scalar>::Zero(p.rows(), p.cols())};
    return failed;
  }

  RpcaResult<Scalar> out;
  out.low_rank.completed = a;
  out.low_rank.objective = rpca_objective(alpha, a, s);
  out.low_rank.rank_estimate = detail::rank_estimate(a);
  monitor.finish(out.low_rank, k, converged);
  out.sparse = std::move(s);
  return out;
}

/// Dispatches on the problem's formulation. For rpca-restricted only the
/// low-rank part is returned.
template <typename Scalar>
SolveResult<Scalar> solve(const CompletionProblem<Scalar>& p, const SolverConfig& cfg = {}) {
  switch (p.formulation()) {
    case Formulation::NnmExact: return solve_nnm_exact(p, cfg);
    case Formulation::NnmReg: return solve_nnm_reg(p, cfg);
    case Formulation::NnmNoisy: return solve_nnm_noisy(p, cfg);
    case Formulation::NnmNoisyReg: return solve_nnm_noisy_reg(p, cfg);
    case Formulation::RpcaRestricted: return solve_rpca_restricted(p, cfg).low_rank;
  }
  throw std::invalid_argument("solve: unknown formulation");
}

}  // namespace smc
