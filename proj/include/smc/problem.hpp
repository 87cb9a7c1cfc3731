#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smc/matrix_core.hpp"

namespace smc {

enum class Formulation {
  NnmExact,      // min ||A||_*                  s.t. P_obs(A) = P_obs(M)
  NnmReg,        // min ||A||_* + a||P_un(A)||_1 s.t. P_obs(A) = P_obs(M)
  NnmNoisy,      // min ||P_obs(M - A)||_F + r||A||_*
  NnmNoisyReg,   // min ||P_obs(M - A)||_F + r||A||_* + a||P_un(A)||_1
  RpcaRestricted // min ||A||_* + a||S||_1       s.t. A + S = P_obs(M)
};

inline std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::NnmExact: return "nnm-exact";
    case Formulation::NnmReg: return "nnm-reg";
    case Formulation::NnmNoisy: return "nnm-noisy";
    case Formulation::NnmNoisyReg: return "nnm-noisy-reg";
    case Formulation::RpcaRestricted: return "rpca-restricted";
  }
  return "unknown";
}

inline std::optional<Formulation> parse_formulation(std::string_view name) {
  for (auto f : {Formulation::NnmExact, Formulation::NnmReg, Formulation::NnmNoisy, Formulation::NnmNoisyReg,
                 Formulation::RpcaRestricted})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

inline bool uses_alpha(Formulation f) {
  return f == Formulation::NnmReg || f == Formulation::NnmNoisyReg || f == Formulation::RpcaRestricted;
}
inline bool uses_rho(Formulation f) { return f == Formulation::NnmNoisy || f == Formulation::NnmNoisyReg; }
inline bool has_observation_constraint(Formulation f) {
  return f == Formulation::NnmExact || f == Formulation::NnmReg;
}

/// Observed data plus mask, formulation and weights. Entries of the stored
/// observation matrix outside the mask are zeroed on construction.
template <typename Scalar>
class CompletionProblem {
 public:
  CompletionProblem(const Matrix<Scalar>& observed_values, ObservationMask mask, Formulation formulation,
                    Scalar alpha = Scalar(0), Scalar rho = Scalar(0))
      : mask_(std::move(mask)), formulation_(formulation), alpha_(alpha), rho_(rho) {
    detail::check_shape(observed_values, mask_, "CompletionProblem");
    if (mask_.empty()) throw std::invalid_argument("CompletionProblem: mask has no observed entries");
    observed_ = project(observed_values, mask_);
    require_finite(observed_, "CompletionProblem observed values");
    if (uses_alpha(formulation) && !(alpha > Scalar(0) && std::isfinite(alpha)))
      throw std::invalid_argument("CompletionProblem: " + std::string(to_string(formulation)) +
                                  " requires alpha > 0");
    if (uses_rho(formulation) && !(rho > Scalar(0) && std::isfinite(rho)))
      throw std::invalid_argument("CompletionProblem: " + std::string(to_string(formulation)) +
                                  " requires rho > 0");
    if (!uses_alpha(formulation)) alpha_ = Scalar(0);
    if (!uses_rho(formulation)) rho_ = Scalar(0);
  }

  const Matrix<Scalar>& observed() const { return observed_; }
  const ObservationMask& mask() const { return mask_; }
  Formulation formulation() const { return formulation_; }
  Scalar alpha() const { return alpha_; }
  Scalar rho() const { return rho_; }
  Index rows() const { return observed_.rows(); }
  Index cols() const { return observed_.cols(); }

  /// Same data and mask, different formulation or weights.
  CompletionProblem with(Formulation formulation, Scalar alpha = Scalar(0), Scalar rho = Scalar(0)) const {
    return CompletionProblem(observed_, mask_, formulation, alpha, rho);
  }

 private:
  Matrix<Scalar> observed_;
  ObservationMask mask_;
  Formulation formulation_;
  Scalar alpha_;
  Scalar rho_;
};

struct SolverConfig {
  int max_iters = 5000;
  double primal_tol = 1e-6;  // absolute, multiplied by sqrt(n1 * n2)
  double dual_tol = 1e-6;
  double admm_penalty = 1.0;
  bool adaptive_penalty = true;
  // Solvers draw no random numbers; kept so configs can assert it.
  bool seed_independent = true;

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
    if (!(primal_tol > 0) || !(dual_tol > 0)) throw std::invalid_argument("SolverConfig: tolerances must be > 0");
    if (!(admm_penalty > 0) || !std::isfinite(admm_penalty))
      throw std::invalid_argument("SolverConfig: admm_penalty must be > 0");
  }
};

enum class SolveStatus { Converged, MaxIters, NumericalFailure };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max-iters";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

template <typename Scalar>
struct SolveResult {
  Matrix<Scalar> completed;
  Scalar objective = Scalar(0);
  int iterations = 0;
  Scalar primal_residual = Scalar(0);
  Scalar dual_residual = Scalar(0);
  SolveStatus status = SolveStatus::MaxIters;
  Index rank_estimate = 0;
  Scalar final_penalty = Scalar(0);
  std::vector<Scalar> primal_history;
  std::vector<Scalar> dual_history;
  std::string message;  // set on numerical failure
};

template <typename Scalar>
struct RpcaResult {
  SolveResult<Scalar> low_rank;
  Matrix<Scalar> sparse;
};

/// Running minimum of a residual history, for plotting only.
template <typename Scalar>
std::vector<Scalar> monotone_envelope(const std::vector<Scalar>& history) {
  std::vector<Scalar> out(history.size());
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k < history.size(); ++k) out[k] = best = std::min(best, history[k]);
  return out;
}

/// Objective of the formulation at A. For the constrained formulations the
/// equality constraint is not checked here. For rpca-restricted the sparse
/// part is taken as S = P_obs(M) - A.
template <typename Scalar, typename Derived>
Scalar objective(const CompletionProblem<Scalar>& p, const Eigen::MatrixBase<Derived>& a) {
  const ObservationMask& mask = p.mask();
  switch (p.formulation()) {
    case Formulation::NnmExact:
      return nuclear_norm(a);
    case Formulation::NnmReg:
      return nuclear_norm(a) + p.alpha() * entrywise_l1(project(a, complement(mask)));
    case Formulation::NnmNoisy:
      return project(p.observed() - a, mask).norm() + p.rho() * nuclear_norm(a);
    case Formulation::NnmNoisyReg:
      return project(p.observed() - a, mask).norm() + p.rho() * nuclear_norm(a) +
             p.alpha() * entrywise_l1(project(a, complement(mask)));
    case Formulation::RpcaRestricted:
      return nuclear_norm(a) + p.alpha() * entrywise_l1(p.observed() - a);
  }
  return Scalar(0);
}

template <typename Scalar, typename ADerived, typename SDerived>
Scalar rpca_objective(Scalar alpha, const Eigen::MatrixBase<ADerived>& low_rank,
                      const Eigen::MatrixBase<SDerived>& sparse) {
  return nuclear_norm(low_rank) + alpha * entrywise_l1(sparse);
}

}  // namespace smc
