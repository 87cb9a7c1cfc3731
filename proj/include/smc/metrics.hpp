#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "smc/matrix_core.hpp"

namespace smc {

enum class RatioOutcome {
  Finite,     // ordinary ratio
  BothExact,  // both errors vanish; excluded from averages
  Infinite    // baseline exact, regularized not
};

struct ErrorRatio {
  RatioOutcome outcome = RatioOutcome::Finite;
  double value = 0.0;  // +inf for Infinite, NaN for BothExact

  bool finite() const { return outcome == RatioOutcome::Finite; }
};

inline constexpr double kExactErrorFloor = 1e-12;

/// ||m_reg - m_true||_F / ||m_nnm - m_true||_F with explicit outcomes when the
/// denominator vanishes.
template <typename A, typename B, typename C>
ErrorRatio error_ratio(const Eigen::MatrixBase<A>& m_reg, const Eigen::MatrixBase<B>& m_nnm,
                       const Eigen::MatrixBase<C>& m_true) {
  detail::check_same_shape(m_reg, m_true, "error_ratio");
  detail::check_same_shape(m_nnm, m_true, "error_ratio");
  const double num = (m_reg - m_true).norm();
  const double den = (m_nnm - m_true).norm();
  if (den == 0.0) {
    if (num <= kExactErrorFloor) return {RatioOutcome::BothExact, std::numeric_limits<double>::quiet_NaN()};
    return {RatioOutcome::Infinite, std::numeric_limits<double>::infinity()};
  }
  return {RatioOutcome::Finite, num / den};
}

/// Same sentinel policy from precomputed Frobenius errors.
inline ErrorRatio error_ratio_from_errors(double err_reg, double err_nnm) {
  if (err_nnm == 0.0) {
    if (err_reg <= kExactErrorFloor) return {RatioOutcome::BothExact, std::numeric_limits<double>::quiet_NaN()};
    return {RatioOutcome::Infinite, std::numeric_limits<double>::infinity()};
  }
  return {RatioOutcome::Finite, err_reg / err_nnm};
}

inline const char* to_string(RatioOutcome o) {
  switch (o) {
    case RatioOutcome::Finite: return "ratio";
    case RatioOutcome::BothExact: return "both-exact";
    case RatioOutcome::Infinite: return "inf";
  }
  return "unknown";
}

template <typename A, typename B>
double relative_error(const Eigen::MatrixBase<A>& m_hat, const Eigen::MatrixBase<B>& m_true) {
  detail::check_same_shape(m_hat, m_true, "relative_error");
  const double scale = m_true.norm();
  if (scale == 0.0) throw std::invalid_argument("relative_error: ground truth is the zero matrix");
  return (m_hat - m_true).norm() / scale;
}

/// Smallest mu satisfying each incoherence condition for the rank-r SVD
/// U S V^T of m:
///   mu_row = n1/r      * max_i ||U^T e_i||^2
///   mu_col = n2/r      * max_j ||V^T e_j||^2
///   mu_uv  = n1*n2/r   * max_ij |(U V^T)_ij|^2
struct Incoherence {
  double mu_row = 0.0;
  double mu_col = 0.0;
  double mu_uv = 0.0;
  Index rank = 0;
};

inline constexpr double kIncoherenceRankCutoff = 1e-10;

Incoherence incoherence(const MatrixXd& m);

}  // namespace smc
