#include "smc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "smc/errors.hpp"
#include "smc/solvers.hpp"

namespace smc {

namespace {

void check_rates(const std::vector<double>& rates, const char* name) {
  if (rates.empty()) throw std::invalid_argument(std::string("sweep: ") + name + " is empty");
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string("sweep: ") + name + " must lie in [0, 1]");
}

std::string cell_label(const Cell& cell, int trial) {
  return "cell (rate_zero=" + std::to_string(cell.rate_zero) + ", rate_nonzero=" + std::to_string(cell.rate_nonzero) +
         ") trial " + std::to_string(trial);
}

std::vector<Cell> enumerate_cells(const SweepSpec& sweep) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < sweep.zero_rates.size(); ++i)
    for (std::size_t j = 0; j < sweep.nonzero_rates.size(); ++j)
      cells.push_back({i, j, sweep.zero_rates[i], sweep.nonzero_rates[j]});
  return cells;
}

/// Ground truth for (cell, trial, attempt); may be all zeros, the caller redraws.
using TruthSource = std::function<MatrixXd(const Cell&, int trial, int attempt)>;

TrialRecord run_trial(const SweepSpec& sweep, const TruthSource& truth_for, const Cell& cell, int trial) {
  TrialRecord rec;
  rec.cell = cell;
  rec.trial_index = trial;

  // ground truth and mask, redrawing degenerate instances
  MatrixXd truth;
  ObservationMask mask;
  int attempt = 0;
  for (;; ++attempt) {
    if (attempt > kMaxRedraws)
      throw DegenerateDrawError("no usable draw after " + std::to_string(kMaxRedraws) + " redraws");
    truth = truth_for(cell, trial, attempt);
    if (truth.isZero(0.0)) continue;
    try {
      mask = sample_structured_mask(
          truth, {cell.rate_zero, cell.rate_nonzero, trial_seed(sweep.base_seed, cell, trial, rng::Purpose::Mask, attempt)});
    } catch (const SamplingError&) {
      continue;
    }
    break;
  }
  rec.redraws = attempt;
  rec.observed = mask.size();

  const bool noisy = sweep.noise_sigma > 0.0;
  MatrixXd observed = truth;
  if (noisy) {
    observed = add_noise(truth, sweep.noise_sigma, mask,
                         trial_seed(sweep.base_seed, cell, trial, rng::Purpose::Noise, attempt));
    rec.rho = rho_for_noise(truth.rows(), truth.cols(), mask.size(), sweep.noise_sigma);
  }

  const CompletionProblem<double> baseline(observed, mask, noisy ? Formulation::NnmNoisy : Formulation::NnmExact,
                                           0.0, rec.rho);
  const SolveResult<double> nnm = solve(baseline, sweep.solver);
  rec.status_nnm = nnm.status;
  rec.err_nnm = (nnm.completed - truth).norm();

  // alphas are visited in ascending order so ties keep the smaller one
  std::vector<std::size_t> order(sweep.alphas.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sweep.alphas[a] < sweep.alphas[b]; });

  rec.errors_per_alpha.assign(sweep.alphas.size(), std::numeric_limits<double>::quiet_NaN());
  rec.err_reg = std::numeric_limits<double>::infinity();
  const Formulation reg = noisy ? Formulation::NnmNoisyReg : Formulation::NnmReg;
  for (std::size_t k : order) {
    const SolveResult<double> r = solve(baseline.with(reg, sweep.alphas[k], rec.rho), sweep.solver);
    const double err = (r.completed - truth).norm();
    rec.errors_per_alpha[k] = err;
    if (err < rec.err_reg) {
      rec.err_reg = err;
      rec.alpha_used = sweep.alphas[k];
      rec.status_reg = r.status;
    }
  }
  rec.ratio = error_ratio_from_errors(rec.err_reg, rec.err_nnm);
  return rec;
}

GridTable run_sweep(const SweepSpec& sweep, const TruthSource& truth_for) {
  const std::vector<Cell> cells = enumerate_cells(sweep);
  const std::size_t trials = static_cast<std::size_t>(sweep.trials);
  const std::size_t tasks = cells.size() * trials;

  std::vector<TrialRecord> records(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const Cell& cell = cells[t / trials];
      const int trial = static_cast<int>(t % trials);
      try {
        records[t] = run_trial(sweep, truth_for, cell, trial);
      } catch (const std::exception& e) {
        errors[t] = std::current_exception();
        records[t].cell = cell;
        records[t].trial_index = trial;
        records[t].failure = e.what();
      }
    }
  };

  std::size_t threads = sweep.threads > 0 ? static_cast<std::size_t>(sweep.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, tasks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  if (!sweep.keep_going) {
    for (std::size_t t = 0; t < tasks; ++t)
      if (errors[t]) throw CellError(records[t].cell, records[t].trial_index, records[t].failure);
  }

  GridTable table;
  table.zero_rates = sweep.zero_rates;
  table.nonzero_rates = sweep.nonzero_rates;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::vector<TrialRecord> slice(records.begin() + static_cast<std::ptrdiff_t>(c * trials),
                                         records.begin() + static_cast<std::ptrdiff_t>((c + 1) * trials));
    table.cells.push_back(summarize(cells[c], slice));
  }
  table.records = std::move(records);
  return table;
}

TruthSource synthetic_truth(const ExperimentGrid& grid) {
  return [&grid](const Cell& cell, int trial, int attempt) {
    GeneratorSpec spec = grid.generator;
    spec.seed = trial_seed(grid.sweep.base_seed, cell, trial, rng::Purpose::Truth, attempt);
    return generate_low_rank(spec);
  };
}

TruthSource real_truth(const RealMatrixSweep& sweep) {
  return [&sweep](const Cell&, int trial, int attempt) -> MatrixXd {
    if (sweep.rows_per_trial <= 0 || sweep.rows_per_trial >= sweep.matrix.rows()) return sweep.matrix;
    // row choice depends on the trial only, so every cell of a trial sees the same rows
    const std::uint64_t seed = rng::derive_key(
        sweep.sweep.base_seed, {static_cast<std::uint64_t>(rng::Purpose::Rows), static_cast<std::uint64_t>(trial),
                                static_cast<std::uint64_t>(attempt)});
    const std::vector<Index> rows = subsample_rows(sweep.matrix.rows(), sweep.rows_per_trial, seed);
    return sweep.matrix(rows, Eigen::all);
  };
}

}  // namespace

CellError::CellError(const Cell& cell, int trial, const std::string& what)
    : std::runtime_error(cell_label(cell, trial) + ": " + what), cell_(cell), trial_(trial) {}

void SweepSpec::validate() const {
  check_rates(zero_rates, "zero_rates");
  check_rates(nonzero_rates, "nonzero_rates");
  if (alphas.empty()) throw std::invalid_argument("sweep: alphas is empty");
  for (double a : alphas)
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("sweep: alphas must be positive");
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("sweep: noise_sigma must be >= 0");
  if (threads < 0) throw std::invalid_argument("sweep: threads must be >= 0");
  solver.validate();
}

void ExperimentGrid::validate() const {
  sweep.validate();
  generator.validate();
}

void RealMatrixSweep::validate() const {
  sweep.validate();
  require_finite(matrix, "real-matrix sweep");
  if (matrix.isZero(0.0)) throw std::invalid_argument("real-matrix sweep: matrix has no nonzero entries");
  if (rows_per_trial < 0) throw std::invalid_argument("real-matrix sweep: rows_per_trial must be >= 0");
}

std::uint64_t trial_seed(std::uint64_t base_seed, const Cell& cell, int trial, rng::Purpose purpose, int attempt) {
  return rng::derive_key(base_seed, {static_cast<std::uint64_t>(purpose), std::bit_cast<std::uint64_t>(cell.rate_zero),
                                     std::bit_cast<std::uint64_t>(cell.rate_nonzero),
                                     static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(attempt)});
}

std::vector<Index> subsample_rows(Index total, Index count, std::uint64_t seed) {
  if (count < 0 || count > total) throw std::invalid_argument("subsample_rows: count out of range");
  std::vector<Index> rows(static_cast<std::size_t>(total));
  for (Index i = 0; i < total; ++i) rows[static_cast<std::size_t>(i)] = i;
  rng::Stream stream(seed);
  // partial Fisher-Yates: the first `count` slots are the sample
  for (Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Index>(stream.below(static_cast<std::uint64_t>(total - i)));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }
  rows.resize(static_cast<std::size_t>(count));
  std::sort(rows.begin(), rows.end());
  return rows;
}

CellSummary summarize(const Cell& cell, const std::vector<TrialRecord>& records) {
  CellSummary s;
  s.cell = cell;
  double ratio_sum = 0.0;
  double alpha_sum = 0.0;
  std::size_t ran = 0;
  for (const auto& r : records) {
    if (r.failed()) {
      ++s.failed;
      continue;
    }
    ++ran;
    alpha_sum += r.alpha_used;
    switch (r.ratio.outcome) {
      case RatioOutcome::Finite:
        ++s.finite;
        ratio_sum += r.ratio.value;
        break;
      case RatioOutcome::BothExact: ++s.both_exact; break;
      case RatioOutcome::Infinite: ++s.infinite; break;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean_ratio = s.finite > 0 ? ratio_sum / static_cast<double>(s.finite) : nan;
  s.mean_alpha = ran > 0 ? alpha_sum / static_cast<double>(ran) : nan;
  return s;
}

TrialRecord run_cell(const ExperimentGrid& grid, const Cell& cell, int trial_index) {
  grid.validate();
  try {
    return run_trial(grid.sweep, synthetic_truth(grid), cell, trial_index);
  } catch (const std::exception& e) {
    throw CellError(cell, trial_index, e.what());
  }
}

GridTable run_grid(const ExperimentGrid& grid) {
  grid.validate();
  return run_sweep(grid.sweep, synthetic_truth(grid));
}

TrialRecord run_real_cell(const RealMatrixSweep& sweep, const Cell& cell, int trial_index) {
  sweep.validate();
  try {
    return run_trial(sweep.sweep, real_truth(sweep), cell, trial_index);
  } catch (const std::exception& e) {
    throw CellError(cell, trial_index, e.what());
  }
}

GridTable run_real_matrix(const RealMatrixSweep& sweep) {
  sweep.validate();
  return run_sweep(sweep.sweep, real_truth(sweep));
}

}  // namespace smc
