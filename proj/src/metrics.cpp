#include "smc/metrics.hpp"

#include <string>

#include "smc/errors.hpp"

namespace smc {

Incoherence incoherence(const MatrixXd& m) {
  require_finite(m, "incoherence");
  Eigen::BDCSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("incoherence: SVD failed on " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix");
  const Index r = numerical_rank<double>(svd.singularValues(), kIncoherenceRankCutoff);
  if (r == 0) throw std::invalid_argument("incoherence: matrix is zero");

  const MatrixXd u = svd.matrixU().leftCols(r);
  const MatrixXd v = svd.matrixV().leftCols(r);
  const auto n1 = static_cast<double>(m.rows());
  const auto n2 = static_cast<double>(m.cols());
  const double rank = static_cast<double>(r);

  Incoherence out;
  out.rank = r;
  out.mu_row = n1 / rank * u.rowwise().squaredNorm().maxCoeff();
  out.mu_col = n2 / rank * v.rowwise().squaredNorm().maxCoeff();
  const double uv_max = (u * v.transpose()).cwiseAbs().maxCoeff();
  out.mu_uv = n1 * n2 / rank * uv_max * uv_max;
  return out;
}

}  // namespace smc
