#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "smc/errors.hpp"

namespace smc {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;

using Index = Eigen::Index;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Throws std::invalid_argument naming `what` if any coefficient is NaN/Inf.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what = "matrix") {
  if (m.size() == 0) throw std::invalid_argument(what + ": empty matrix");
  if (!m.allFinite()) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        if (!std::isfinite(m(i, j)))
          throw std::invalid_argument(what + ": non-finite entry at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
  }
}

/// Index set of observed entries together with a same-shape boolean lookup
/// table. Entries are kept sorted in row-major order. Immutable.
class ObservationMask {
 public:
  using Entry = std::pair<Index, Index>;

  ObservationMask() = default;

  /// Throws std::invalid_argument on out-of-range or duplicate pairs.
  ObservationMask(Index rows, Index cols, std::vector<Entry> observed)
      : rows_(rows), cols_(cols), lookup_(BoolArray::Constant(rows, cols, false)) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("ObservationMask: non-positive dimensions");
    for (const auto& [i, j] : observed) {
      if (i < 0 || i >= rows || j < 0 || j >= cols)
        throw std::invalid_argument("ObservationMask: index (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") out of range");
      if (lookup_(i, j))
        throw std::invalid_argument("ObservationMask: duplicate index (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      lookup_(i, j) = true;
    }
    std::sort(observed.begin(), observed.end());
    observed_ = std::move(observed);
  }

  explicit ObservationMask(BoolArray lookup)
      : rows_(lookup.rows()), cols_(lookup.cols()), lookup_(std::move(lookup)) {
    if (rows_ <= 0 || cols_ <= 0) throw std::invalid_argument("ObservationMask: non-positive dimensions");
    for (Index i = 0; i < rows_; ++i)
      for (Index j = 0; j < cols_; ++j)
        if (lookup_(i, j)) observed_.emplace_back(i, j);
  }

  static ObservationMask full(Index rows, Index cols) {
    return ObservationMask(BoolArray::Constant(rows, cols, true));
  }
  static ObservationMask none(Index rows, Index cols) {
    return ObservationMask(BoolArray::Constant(rows, cols, false));
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t size() const { return observed_.size(); }
  bool empty() const { return observed_.empty(); }
  bool is_full() const { return static_cast<Index>(observed_.size()) == rows_ * cols_; }

  bool contains(Index i, Index j) const { return lookup_(i, j); }
  const std::vector<Entry>& entries() const { return observed_; }
  const BoolArray& lookup() const { return lookup_; }

  bool same_shape(Index rows, Index cols) const { return rows_ == rows && cols_ == cols; }

  friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.observed_ == b.observed_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  BoolArray lookup_;
  std::vector<Entry> observed_;
};

inline ObservationMask complement(const ObservationMask& mask) {
  return ObservationMask(BoolArray(!mask.lookup()));
}

namespace detail {
template <typename Derived>
void check_shape(const Eigen::MatrixBase<Derived>& m, const ObservationMask& mask, const char* op) {
  if (!mask.same_shape(m.rows(), m.cols()))
    throw std::invalid_argument(std::string(op) + ": mask is " + std::to_string(mask.rows()) + "x" +
                                std::to_string(mask.cols()) + " but matrix is " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

template <typename A, typename B>
void check_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}
}  // namespace detail

/// Keeps entries in the mask and zeroes the rest.
template <typename Derived>
Matrix<typename Derived::Scalar> project(const Eigen::MatrixBase<Derived>& m, const ObservationMask& mask) {
  using Scalar = typename Derived::Scalar;
  detail::check_shape(m, mask, "project");
  return mask.lookup().select(m.derived().array(), Scalar(0)).matrix();
}

/// Singular values from a full SVD, in decreasing order.
template <typename Derived>
Vector<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::BDCSVD<Matrix<Scalar>> svd(m.derived().eval());
  if (svd.info() != Eigen::Success)
    throw NumericalError("singular_values: SVD failed on " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix");
  return svd.singularValues();
}

template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& m) {
  return singular_values(m).sum();
}

template <typename Derived>
typename Derived::Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

template <typename Derived>
typename Derived::Scalar entrywise_l1(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().sum();
}

/// Number of singular values strictly above `relative_cutoff * sigma_max`.
template <typename Scalar>
Index numerical_rank(const Vector<Scalar>& sigma, Scalar relative_cutoff) {
  if (sigma.size() == 0 || sigma(0) <= Scalar(0)) return 0;
  const Scalar floor = relative_cutoff * sigma(0);
  return static_cast<Index>((sigma.array() > floor).count());
}

}  // namespace smc
