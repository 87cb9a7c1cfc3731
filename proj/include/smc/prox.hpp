#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "smc/matrix_core.hpp"

namespace smc {

namespace detail {
template <typename Scalar>
void check_tau(Scalar tau, const char* op) {
  if (!(tau > Scalar(0)) || !std::isfinite(tau))
    throw std::invalid_argument(std::string(op) + ": tau must be positive and finite");
}
}  // namespace detail

/// Singular value thresholding: the prox of tau * ||.||_*.
///   svt(m, tau) = U * max(Sigma - tau, 0) * V^T
template <typename Derived>
Matrix<typename Derived::Scalar> svt(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  detail::check_tau(tau, "svt");
  Eigen::BDCSVD<Matrix<Scalar>> svd(m.derived().eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("svt: SVD failed on " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix");
  const Vector<Scalar> shrunk = (svd.singularValues().array() - tau).cwiseMax(Scalar(0)).matrix();
  const Index keep = static_cast<Index>((shrunk.array() > Scalar(0)).count());
  if (keep == 0) return Matrix<Scalar>::Zero(m.rows(), m.cols());
  // singular values are sorted, so the surviving ones form a leading block
  return svd.matrixU().leftCols(keep) * shrunk.head(keep).asDiagonal() *
         svd.matrixV().leftCols(keep).transpose();
}

/// Entrywise soft-thresholding on `support`; entries outside pass through.
template <typename Derived>
Matrix<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tau,
                                                const ObservationMask& support) {
  using Scalar = typename Derived::Scalar;
  detail::check_tau(tau, "soft_threshold");
  detail::check_shape(m, support, "soft_threshold");
  const auto a = m.derived().array();
  const auto shrunk = a.sign() * (a.abs() - tau).cwiseMax(Scalar(0));
  return support.lookup().select(shrunk, a).matrix();
}

/// Prox of tau * ||P_mask(observed - .)||_F (unsquared). The masked residual
/// is block-shrunk toward the observations; unmasked entries are untouched.
template <typename Derived, typename ObsDerived>
Matrix<typename Derived::Scalar> prox_obs_fit(const Eigen::MatrixBase<Derived>& m,
                                              const Eigen::MatrixBase<ObsDerived>& observed_values,
                                              const ObservationMask& mask, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  detail::check_tau(tau, "prox_obs_fit");
  detail::check_same_shape(m, observed_values, "prox_obs_fit");
  detail::check_shape(m, mask, "prox_obs_fit");
  const Matrix<Scalar> residual = project(m - observed_values, mask);
  const Scalar norm = residual.norm();
  if (norm == Scalar(0)) return m;
  const Scalar scale = std::max(Scalar(1) - tau / norm, Scalar(0));
  return mask.lookup().select((observed_values + scale * (m - observed_values)).array(), m.derived().array()).matrix();
}

/// Overwrites the masked entries of `m` with `observed_values`.
template <typename Derived, typename ObsDerived>
Matrix<typename Derived::Scalar> enforce_observed(const Eigen::MatrixBase<Derived>& m,
                                                  const Eigen::MatrixBase<ObsDerived>& observed_values,
                                                  const ObservationMask& mask) {
  detail::check_same_shape(m, observed_values, "enforce_observed");
  detail::check_shape(m, mask, "enforce_observed");
  return mask.lookup().select(observed_values.derived().array(), m.derived().array()).matrix();
}

}  // namespace smc
