#include <cmath>

#include "doctest.h"
#include "smc/oracle.hpp"
#include "smc/prox.hpp"
#include "support.hpp"

using namespace smc;

namespace {

/// Closed-form svt through the eigen-decomposition of m^T m:
///   U shrink(S) V^T = m V diag(shrink(s) / s) V^T
MatrixXd svt_via_gram(const MatrixXd& m, double tau) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m.transpose() * m);
  const Vector<double> s = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Vector<double> gain(s.size());
  for (Index k = 0; k < s.size(); ++k) gain(k) = s(k) > tau ? (s(k) - tau) / s(k) : 0.0;
  return m * eig.eigenvectors() * gain.asDiagonal() * eig.eigenvectors().transpose();
}

Vector<double> flatten(const MatrixXd& m) { return Eigen::Map<const Vector<double>>(m.data(), m.size()); }

MatrixXd unflatten(const Vector<double>& x, Index rows, Index cols) {
  return Eigen::Map<const MatrixXd>(x.data(), rows, cols);
}

/// argmin_X  h(X) + 1/2 ||X - m||_F^2  by derivative-free search.
template <typename H>
MatrixXd brute_force_prox(const MatrixXd& m, H h) {
  const auto f = [&](const Vector<double>& x) {
    const MatrixXd X = unflatten(x, m.rows(), m.cols());
    return h(X) + 0.5 * (X - m).squaredNorm();
  };
  const SimplexResult r = polytope_search(f, {flatten(m), Vector<double>::Zero(m.size())}, 0.5, 60, 40000);
  return unflatten(r.x, m.rows(), m.cols());
}

bool firmly_nonexpansive(const MatrixXd& a, const MatrixXd& b, const MatrixXd& pa, const MatrixXd& pb) {
  const double lhs = (pa - pb).squaredNorm();
  const double rhs = (pa - pb).cwiseProduct(a - b).sum();
  return lhs <= rhs + 1e-12 && (pa - pb).norm() <= (a - b).norm() + 1e-12;
}

}  // namespace

TEST_CASE("svt shrinks singular values") {
  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  MatrixXd expected = MatrixXd::Zero(2, 2);
  expected(0, 0) = 1;
  CHECK((svt(d, 2.0) - expected).norm() < 1e-14);

  rng::Stream s(5);
  const MatrixXd m = test::gaussian(4, 6, s);
  CHECK(svt(m, singular_values(m)(0)) == MatrixXd::Zero(4, 6));
  CHECK(svt(m, 2.0 * singular_values(m)(0)) == MatrixXd::Zero(4, 6));

  CHECK_THROWS_AS(svt(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(svt(m, -1.0), std::invalid_argument);
}

TEST_CASE("svt matches the prox definition on a random 4x4") {
  rng::Stream s(404);
  const MatrixXd m = test::gaussian(4, 4, s);
  const double tau = 0.5;
  const MatrixXd reference = brute_force_prox(m, [&](const MatrixXd& x) { return tau * nuclear_norm(x); });
  CHECK((svt(m, tau) - reference).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("svt output singular values are max(sigma - tau, 0)") {
  rng::Stream s(6);
  for (int k = 0; k < 30; ++k) {
    const MatrixXd m = test::gaussian(5, 3, s);
    const double tau = 0.1 + s.uniform();
    const Vector<double> sigma = singular_values(m);
    const Vector<double> out = singular_values(svt(m, tau));
    CHECK((out - (sigma.array() - tau).cwiseMax(0.0).matrix()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(nuclear_norm(svt(m, tau)) <= nuclear_norm(m));
    CHECK((svt(m, tau) - svt_via_gram(m, tau)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("soft_threshold") {
  MatrixXd row(1, 2);
  row << 2, -0.5;
  MatrixXd expected(1, 2);
  expected << 1, 0;
  CHECK(soft_threshold(row, 1.0, ObservationMask::full(1, 2)) == expected);

  rng::Stream s(8);
  const MatrixXd m = test::gaussian(3, 3, s);
  CHECK(soft_threshold(m, 0.3, ObservationMask::none(3, 3)) == m);

  const MatrixXd threes = MatrixXd::Constant(2, 2, 3.0);
  MatrixXd only_first = threes;
  only_first(0, 0) = 2;
  CHECK(soft_threshold(threes, 1.0, ObservationMask(2, 2, {{0, 0}})) == only_first);

  CHECK_THROWS_AS(soft_threshold(m, 1.0, ObservationMask::full(2, 3)), std::invalid_argument);
}

TEST_CASE("soft_threshold lowers the supported L1 norm by sum min(|x|, tau)") {
  rng::Stream s(9);
  for (int k = 0; k < 30; ++k) {
    const MatrixXd m = test::gaussian(4, 5, s);
    const ObservationMask support = test::random_mask(4, 5, 0.6, s);
    const double tau = 0.7 * s.uniform() + 0.01;
    const MatrixXd out = soft_threshold(m, tau, support);
    const double drop = entrywise_l1(project(m, support)) - entrywise_l1(project(out, support));
    const double expected = project(m, support).cwiseAbs().cwiseMin(tau).sum();
    CHECK(drop == doctest::Approx(expected).epsilon(1e-12));
    CHECK(project(out, complement(support)) == project(m, complement(support)));
  }
}

TEST_CASE("prox_obs_fit") {
  rng::Stream s(10);
  const MatrixXd obs = test::gaussian(3, 4, s);
  const ObservationMask mask = test::random_mask(3, 4, 0.5, s);
  // zero residual on the mask is a fixed point
  const MatrixXd m = enforce_observed(test::gaussian(3, 4, s), obs, mask);
  CHECK(prox_obs_fit(m, obs, mask, 0.7) == m);

  SUBCASE("residual of norm 2 tau is halved") {
    const MatrixXd x = test::gaussian(3, 4, s);
    const double tau = 0.5 * project(MatrixXd(x - obs), mask).norm();
    const MatrixXd out = prox_obs_fit(x, obs, mask, tau);
    CHECK((project(MatrixXd(out - obs), mask) - 0.5 * project(MatrixXd(x - obs), mask)).norm() < 1e-14);
    CHECK(project(out, complement(mask)) == project(x, complement(mask)));
  }

  SUBCASE("small residual snaps to the observations") {
    const MatrixXd x = obs + 1e-3 * test::gaussian(3, 4, s);
    const MatrixXd out = prox_obs_fit(x, obs, mask, 1.0);
    CHECK(project(out, mask) == project(obs, mask));
  }

  SUBCASE("matches the prox definition on a random 3x3") {
    const MatrixXd o = test::gaussian(3, 3, s);
    const ObservationMask om(3, 3, {{0, 0}, {0, 2}, {1, 1}, {2, 0}, {2, 1}});
    const MatrixXd x = 2.0 * test::gaussian(3, 3, s);
    const double tau = 0.6;
    const MatrixXd reference =
        brute_force_prox(x, [&](const MatrixXd& a) { return tau * project(MatrixXd(a - o), om).norm(); });
    CHECK((prox_obs_fit(x, o, om, tau) - reference).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("enforce_observed") {
  rng::Stream s(12);
  const MatrixXd m = test::gaussian(2, 3, s);
  const MatrixXd obs = test::gaussian(2, 3, s);
  CHECK(enforce_observed(m, obs, ObservationMask::full(2, 3)) == obs);
  CHECK(enforce_observed(m, obs, ObservationMask::none(2, 3)) == m);

  MatrixXd nines(1, 2);
  nines << 9, 9;
  MatrixXd o(1, 2);
  o << 1, -123;
  MatrixXd expected(1, 2);
  expected << 1, 9;
  CHECK(enforce_observed(nines, o, ObservationMask(1, 2, {{0, 0}})) == expected);
  CHECK_THROWS_AS(enforce_observed(m, MatrixXd(2, 2), ObservationMask::full(2, 3)), std::invalid_argument);
}

TEST_CASE("every prox is firmly nonexpansive") {
  rng::Stream s(13);
  for (int k = 0; k < 40; ++k) {
    const MatrixXd a = test::gaussian(4, 3, s);
    const MatrixXd b = a + test::gaussian(4, 3, s) * s.uniform();
    const MatrixXd obs = test::gaussian(4, 3, s);
    const ObservationMask mask = test::random_mask(4, 3, 0.5, s);
    const double tau = 0.05 + s.uniform();
    CHECK(firmly_nonexpansive(a, b, svt(a, tau), svt(b, tau)));
    CHECK(firmly_nonexpansive(a, b, soft_threshold(a, tau, mask), soft_threshold(b, tau, mask)));
    CHECK(firmly_nonexpansive(a, b, prox_obs_fit(a, obs, mask, tau), prox_obs_fit(b, obs, mask, tau)));
    CHECK(firmly_nonexpansive(a, b, enforce_observed(a, obs, mask), enforce_observed(b, obs, mask)));
  }
}
