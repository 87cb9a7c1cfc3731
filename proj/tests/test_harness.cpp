#include <cmath>

#include "doctest.h"
#include "smc/errors.hpp"
#include "smc/harness.hpp"
#include "support.hpp"

using namespace smc;

namespace {

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.generator = {10, 10, 2, 0.5, 0.6, 0};
  g.sweep.zero_rates = {0.0, 0.5};
  g.sweep.nonzero_rates = {0.6, 1.0};
  g.sweep.trials = 2;
  g.sweep.base_seed = 42;
  g.sweep.solver.max_iters = 3000;
  return g;
}

bool same_records(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto& x = a[k];
    const auto& y = b[k];
    if (x.cell.rate_zero != y.cell.rate_zero || x.cell.rate_nonzero != y.cell.rate_nonzero ||
        x.trial_index != y.trial_index || x.alpha_used != y.alpha_used || x.err_reg != y.err_reg ||
        x.err_nnm != y.err_nnm || x.observed != y.observed || x.errors_per_alpha != y.errors_per_alpha)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("fully observed cells are both-exact") {
  ExperimentGrid g = small_grid();
  const TrialRecord r = run_cell(g, {0, 0, 1.0, 1.0}, 0);
  CHECK(r.err_nnm <= 1e-9);
  CHECK(r.err_reg <= 1e-9);
  CHECK(r.observed == 100);
  // an exact zero denominator is what the sentinel needs; the solvers return
  // the data bit-for-bit when nothing is missing
  CHECK(r.ratio.outcome == RatioOutcome::BothExact);
}

TEST_CASE("all-zero gaps: regularization never loses") {
  ExperimentGrid g = small_grid();
  g.sweep.solver.primal_tol = g.sweep.solver.dual_tol = 1e-10;
  g.sweep.solver.max_iters = 20000;
  for (int trial = 0; trial < 4; ++trial) {
    const TrialRecord r = run_cell(g, {0, 0, 0.0, 1.0}, trial);
    CAPTURE(trial);
    if (r.ratio.finite()) CHECK(r.ratio.value <= 1.0 + 1e-6);
    else CHECK(r.ratio.outcome == RatioOutcome::BothExact);
  }
}

TEST_CASE("records are deterministic and independent of thread count") {
  ExperimentGrid g = small_grid();
  const GridTable one = run_grid(g);
  g.sweep.threads = 3;
  const GridTable three = run_grid(g);
  CHECK(same_records(one.records, three.records));
  CHECK(one.cells.size() == 4);
  CHECK(one.records.size() == 8);

  const TrialRecord replay = run_cell(g, {0, 1, 0.0, 1.0}, 1);
  CHECK(same_records({replay}, {one.records[3]}));
}

TEST_CASE("alpha_used is the argmin over the grid with ties to the smaller alpha") {
  ExperimentGrid g = small_grid();
  g.sweep.alphas = {1e-2, 1e-1, 1e-4, 1e-3};
  const GridTable t = run_grid(g);
  for (const auto& r : t.records) {
    double best = r.errors_per_alpha[0];
    for (double e : r.errors_per_alpha) best = std::min(best, e);
    CHECK(r.err_reg == best);
    double smallest_tied = 1.0;
    for (std::size_t k = 0; k < g.sweep.alphas.size(); ++k)
      if (r.errors_per_alpha[k] == best) smallest_tied = std::min(smallest_tied, g.sweep.alphas[k]);
    CHECK(r.alpha_used == smallest_tied);
  }
}

TEST_CASE("a 1x1 grid with one trial reproduces its record") {
  ExperimentGrid g = small_grid();
  g.sweep.zero_rates = {0.3};
  g.sweep.nonzero_rates = {0.8};
  g.sweep.trials = 1;
  const GridTable t = run_grid(g);
  REQUIRE(t.cells.size() == 1);
  const TrialRecord& r = t.records.front();
  CHECK(t.at(0, 0).mean_alpha == r.alpha_used);
  if (r.ratio.finite()) CHECK(t.at(0, 0).mean_ratio == r.ratio.value);
}

TEST_CASE("summarize excludes sentinels and failures from the mean") {
  const Cell c{0, 0, 0.5, 0.5};
  std::vector<TrialRecord> recs(4);
  recs[0].ratio = {RatioOutcome::Finite, 0.5};
  recs[0].alpha_used = 0.1;
  recs[1].ratio = {RatioOutcome::Finite, 1.5};
  recs[1].alpha_used = 0.01;
  recs[2].ratio = error_ratio_from_errors(0.0, 0.0);
  recs[2].alpha_used = 0.1;
  recs[3].failure = "boom";
  const CellSummary s = summarize(c, recs);
  CHECK(s.mean_ratio == 1.0);
  CHECK(s.finite == 2);
  CHECK(s.both_exact == 1);
  CHECK(s.failed == 1);
  CHECK(s.mean_alpha == doctest::Approx(0.21 / 3));
  CHECK(std::isnan(summarize(c, {recs[2]}).mean_ratio));
}

TEST_CASE("noisy sweeps pick rho from the observed count") {
  ExperimentGrid g = small_grid();
  g.sweep.noise_sigma = 0.1;
  const TrialRecord r = run_cell(g, {0, 0, 0.2, 0.9}, 0);
  CHECK(r.rho == rho_for_noise(10, 10, r.observed, 0.1));
  CHECK(r.err_nnm > 0.0);
}

TEST_CASE("degenerate draws are redrawn, then reported") {
  ExperimentGrid g = small_grid();
  // sparse factors make all-zero draws common
  g.generator = {3, 3, 1, 0.15, 0.15, 0};
  int redrawn = 0;
  for (int trial = 0; trial < 20; ++trial) {
    try {
      redrawn += run_cell(g, {0, 0, 0.0, 1.0}, trial).redraws > 0;
    } catch (const CellError&) {
      ++redrawn;
    }
  }
  CHECK(redrawn > 0);

  g.generator.density_left = 0.0;
  try {
    run_cell(g, {1, 0, 0.5, 1.0}, 3);
    FAIL("expected a CellError");
  } catch (const CellError& e) {
    CHECK(e.cell().zero_index == 1);
    CHECK(e.trial() == 3);
    CHECK(std::string(e.what()).find("rate_zero=0.5") != std::string::npos);
  }

  g.sweep.keep_going = true;
  g.sweep.zero_rates = {0.5};
  g.sweep.nonzero_rates = {1.0};
  const GridTable t = run_grid(g);
  CHECK(t.at(0, 0).failed == 2);
  CHECK(t.records[0].failed());
  g.sweep.keep_going = false;
  CHECK_THROWS_AS(run_grid(g), CellError);
}

TEST_CASE("trial seeds depend on rate values, not positions") {
  const Cell a{0, 0, 0.1, 0.9};
  const Cell moved{3, 7, 0.1, 0.9};
  CHECK(trial_seed(1, a, 0, rng::Purpose::Truth, 0) == trial_seed(1, moved, 0, rng::Purpose::Truth, 0));
  CHECK(trial_seed(1, a, 0, rng::Purpose::Truth, 0) != trial_seed(1, a, 0, rng::Purpose::Mask, 0));
  CHECK(trial_seed(1, a, 0, rng::Purpose::Truth, 0) != trial_seed(1, a, 1, rng::Purpose::Truth, 0));
  CHECK(trial_seed(1, a, 0, rng::Purpose::Truth, 0) != trial_seed(2, a, 0, rng::Purpose::Truth, 0));
}

TEST_CASE("real-matrix sweeps") {
  rng::Stream s(5);
  MatrixXd survey(60, 8);
  for (Index i = 0; i < 60; ++i)
    for (Index j = 0; j < 8; ++j) survey(i, j) = static_cast<double>(s.below(5));

  RealMatrixSweep sweep;
  sweep.matrix = survey;
  sweep.sweep.zero_rates = {1.0};
  sweep.sweep.nonzero_rates = {1.0};
  sweep.sweep.trials = 2;
  const GridTable full = run_real_matrix(sweep);
  for (const auto& r : full.records) {
    CHECK(r.err_nnm == 0.0);
    CHECK(r.err_reg == 0.0);
  }

  SUBCASE("row subsampling is reproducible and ascending") {
    const auto rows = subsample_rows(60, 50, 99);
    CHECK(rows.size() == 50);
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
    CHECK(rows == subsample_rows(60, 50, 99));
    CHECK(rows != subsample_rows(60, 50, 100));
    CHECK_THROWS_AS(subsample_rows(10, 11, 1), std::invalid_argument);

    sweep.rows_per_trial = 50;
    sweep.sweep.zero_rates = {0.2};
    sweep.sweep.nonzero_rates = {0.9};
    sweep.sweep.trials = 1;
    const TrialRecord a = run_real_cell(sweep, {0, 0, 0.2, 0.9}, 0);
    const TrialRecord b = run_real_cell(sweep, {0, 0, 0.2, 0.9}, 0);
    CHECK(same_records({a}, {b}));
  }

  sweep.matrix = MatrixXd::Zero(5, 5);
  CHECK_THROWS_AS(run_real_matrix(sweep), std::invalid_argument);
}
