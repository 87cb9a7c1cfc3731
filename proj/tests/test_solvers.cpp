#include <cmath>

#include "corpus.hpp"
#include "doctest.h"
#include "smc/oracle.hpp"
#include "smc/solvers.hpp"
#include "support.hpp"

using namespace smc;

namespace {

SolverConfig tight() {
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.primal_tol = 1e-10;
  cfg.dual_tol = 1e-10;
  return cfg;
}

ObservationMask all_but(Index rows, Index cols, Index i, Index j) {
  std::vector<ObservationMask::Entry> e;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (r != i || c != j) e.emplace_back(r, c);
  return ObservationMask(rows, cols, e);
}

}  // namespace

TEST_CASE("a fully observed matrix is returned as is") {
  rng::Stream s(1);
  const MatrixXd m = test::low_rank(6, 5, 2, s);
  const CompletionProblem<double> p(m, ObservationMask::full(6, 5), Formulation::NnmExact);
  const auto r = solve(p);
  CHECK(r.status == SolveStatus::Converged);
  CHECK((r.completed - m).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(solve(p.with(Formulation::NnmReg, 0.1)).completed == m);
}

TEST_CASE("2x2 all-ones with one gap") {
  const CompletionProblem<double> p(MatrixXd::Ones(2, 2), all_but(2, 2, 1, 1), Formulation::NnmExact);

  SUBCASE("nnm-exact fills in a one") {
    const auto r = solve(p, tight());
    CHECK(r.completed(1, 1) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.rank_estimate == 1);
  }

  SUBCASE("nnm-reg with alpha 0.1 pulls the gap toward zero") {
    // minimizer of sqrt(3 + x^2 + 2|x - 1|) + 0.1|x|, frozen from a grid scan
    const auto r = solve(p.with(Formulation::NnmReg, 0.1), tight());
    CHECK(r.completed(1, 1) == doctest::Approx(0.7989924369481576).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(2.0899748742132864).epsilon(1e-9));
  }
}

TEST_CASE("rank-1 10x10 with 80 observed entries is recovered") {
  rng::Stream s(10);
  const MatrixXd m = test::low_rank(10, 10, 1, s);
  const ObservationMask mask = test::uniform_mask(10, 10, 80, s);
  const auto r = solve(CompletionProblem<double>(m, mask, Formulation::NnmExact), tight());
  CHECK((r.completed - m).norm() / m.norm() < 1e-3);
}

TEST_CASE("nnm-reg with a vanishing weight approaches nnm-exact") {
  rng::Stream s(20);
  for (int k = 0; k < 3; ++k) {
    const MatrixXd m = test::low_rank(8, 8, 2, s);
    const ObservationMask mask = test::uniform_mask(8, 8, 48, s);
    const CompletionProblem<double> p(m, mask, Formulation::NnmExact);
    const auto exact = solve(p, tight());
    const auto reg = solve(p.with(Formulation::NnmReg, 1e-8), tight());
    CHECK((exact.completed - reg.completed).norm() <= 1e-4 * std::max(1.0, exact.completed.norm()));
  }
}

TEST_CASE("with zero-valued gaps the regularized solution errs no more than nnm-exact") {
  rng::Stream s(30);
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    MatrixXd m = test::low_rank(8, 8, 1 + static_cast<Index>(s.below(2)), s);
    for (Index i = 0; i < 8; ++i) m(i, s.below(8)) = 0.0;
    std::vector<ObservationMask::Entry> obs;
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j)
        if (m(i, j) != 0.0 || s.uniform() < 0.5) obs.emplace_back(i, j);
    const CompletionProblem<double> p(m, ObservationMask(8, 8, obs), Formulation::NnmExact);
    const auto base = solve(p, tight());
    const auto reg = solve(p.with(Formulation::NnmReg, 0.01), tight());
    CHECK((reg.completed - m).norm() <= (base.completed - m).norm() + 1e-6);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("nnm-noisy extremes") {
  rng::Stream s(40);
  const MatrixXd m = test::low_rank(5, 5, 2, s);
  const ObservationMask full = ObservationMask::full(5, 5);

  SUBCASE("tiny rho reproduces M") {
    const auto r = solve(CompletionProblem<double>(m, full, Formulation::NnmNoisy, 0.0, 1e-8), tight());
    CHECK((r.completed - m).norm() < 1e-6 * m.norm());
  }

  SUBCASE("rho at or above the dual norm bound gives zero") {
    // zero is optimal once rho * ||A||_* dominates ||A||_F for every A
    const auto r = solve(CompletionProblem<double>(m, full, Formulation::NnmNoisy, 0.0, 1.5), tight());
    CHECK(r.completed.norm() < 1e-6);
    CHECK(r.objective == doctest::Approx(m.norm()).epsilon(1e-8));
  }
}

TEST_CASE("ADMM agrees with the brute-force oracle on tiny instances") {
  for (const auto& p : test::tiny_corpus()) {
    CAPTURE(to_string(p.formulation()));
    const auto admm = solve(p, tight());
    const auto ref = oracle_solve(p);
    // minimizers need not be unique, so only objectives are compared
    CHECK(std::abs(admm.objective - ref.objective) < 1e-6);
  }
}

TEST_CASE("nnm-noisy-reg with a vanishing weight approaches nnm-noisy") {
  rng::Stream s(50);
  const MatrixXd m = test::low_rank(8, 8, 2, s);
  const ObservationMask mask = test::uniform_mask(8, 8, 40, s);
  const CompletionProblem<double> noisy(m, mask, Formulation::NnmNoisy, 0.0, 0.3);
  const auto a = solve(noisy, tight());
  const auto b = solve(noisy.with(Formulation::NnmNoisyReg, 1e-8, 0.3), tight());
  CHECK(std::abs(a.objective - b.objective) < 1e-6);
  CHECK((a.completed - b.completed).norm() < 1e-3 * std::max(1.0, a.completed.norm()));
}

TEST_CASE("rpca-restricted") {
  rng::Stream s(60);

  SUBCASE("a large alpha on clean low-rank data leaves no sparse part") {
    const MatrixXd m = test::low_rank(6, 6, 1, s);
    const CompletionProblem<double> p(m, ObservationMask::full(6, 6), Formulation::RpcaRestricted, 2.0);
    const auto r = solve_rpca_restricted(p, tight());
    CHECK(r.sparse.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((r.low_rank.completed - m).norm() < 1e-6 * m.norm());
  }

  SUBCASE("recovers a low-rank matrix from sparse spikes") {
    const MatrixXd u = (test::gaussian(20, 1, s).cwiseAbs().array() + 0.5).matrix();
    const MatrixXd v = (test::gaussian(1, 20, s).cwiseAbs().array() + 0.5).matrix();
    const MatrixXd low = u * v;
    MatrixXd data = low;
    for (int k = 0; k < 8; ++k) data(s.below(20), s.below(20)) += 10.0;
    const CompletionProblem<double> p(data, ObservationMask::full(20, 20), Formulation::RpcaRestricted,
                                      1.0 / std::sqrt(20.0));
    const auto r = solve_rpca_restricted(p, tight());
    CHECK((r.low_rank.completed - low).norm() / low.norm() < 1e-2);
    CHECK((r.low_rank.completed + r.sparse - data).norm() < 1e-6 * data.norm());
  }
}

TEST_CASE("solver bookkeeping") {
  rng::Stream s(70);
  const MatrixXd m = test::low_rank(9, 7, 2, s);
  const ObservationMask mask = test::uniform_mask(9, 7, 40, s);
  const CompletionProblem<double> p(m, mask, Formulation::NnmReg, 0.05);

  const auto a = solve(p);
  const auto b = solve(p);
  CHECK(a.completed == b.completed);
  CHECK(a.iterations == b.iterations);

  // never worse than the zero-filled start
  CHECK(a.objective <= objective(p, p.observed()) + 1e-9);

  SolverConfig cfg;
  if (a.status == SolveStatus::Converged) {
    CHECK(a.primal_residual <= cfg.primal_tol * std::sqrt(63.0));
    CHECK(a.dual_residual <= cfg.dual_tol * std::sqrt(63.0));
  }
  CHECK(a.primal_history.size() == static_cast<std::size_t>(a.iterations));

  cfg.max_iters = 3;
  const auto capped = solve(p, cfg);
  CHECK(capped.iterations == 3);
  CHECK(capped.status == SolveStatus::MaxIters);

  CHECK_THROWS_AS(solve_nnm_exact(p), std::invalid_argument);
  cfg.max_iters = 0;
  CHECK_THROWS_AS(solve(p, cfg), std::invalid_argument);
}

TEST_CASE("monotone_envelope") {
  CHECK(monotone_envelope<double>({3, 1, 2, 0.5}) == std::vector<double>{3, 1, 1, 0.5});
  CHECK(monotone_envelope<double>({}).empty());
}
