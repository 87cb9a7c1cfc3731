#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "smc/matrix_core.hpp"
#include "smc/random.hpp"

namespace smc::test {

inline MatrixXd gaussian(Index rows, Index cols, rng::Stream& s) {
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = s.normal();
  return m;
}

inline MatrixXd random_orthogonal(Index n, rng::Stream& s) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(n, n, s));
  return qr.householderQ();
}

inline MatrixXd low_rank(Index rows, Index cols, Index rank, rng::Stream& s) {
  return gaussian(rows, rank, s) * gaussian(rank, cols, s);
}

/// Observes `count` entries chosen uniformly without replacement.
inline ObservationMask uniform_mask(Index rows, Index cols, std::size_t count, rng::Stream& s) {
  std::vector<ObservationMask::Entry> all;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) all.emplace_back(i, j);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(s.below(all.size() - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return ObservationMask(rows, cols, std::move(all));
}

inline ObservationMask random_mask(Index rows, Index cols, double p, rng::Stream& s) {
  BoolArray b(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) b(i, j) = s.uniform() < p;
  return ObservationMask(std::move(b));
}

/// Nuclear norm via the eigenvalues of m^T m; shares nothing with the SVD path.
inline double nuclear_norm_via_gram(const MatrixXd& m) {
  // the smaller Gram matrix has no spurious null space
  const MatrixXd gram = m.rows() < m.cols() ? MatrixXd(m * m.transpose()) : MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  return eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace smc::test
