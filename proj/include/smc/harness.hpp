#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smc/matrix_core.hpp"
#include "smc/metrics.hpp"
#include "smc/problem.hpp"
#include "smc/random.hpp"
#include "smc/synth.hpp"

namespace smc {

/// Sampling-rate sweep shared by synthetic and real-matrix experiments.
struct SweepSpec {
  std::vector<double> zero_rates;
  std::vector<double> nonzero_rates;
  std::vector<double> alphas{1e-1, 1e-2, 1e-3, 1e-4};
  int trials = 10;
  double noise_sigma = 0.0;  // 0 = noiseless
  std::uint64_t base_seed = 0;
  SolverConfig solver;
  int threads = 1;  // 0 = hardware concurrency
  bool keep_going = false;  // record failed trials instead of throwing

  void validate() const;
};

/// Synthetic experiment: ground truth drawn from `generator` (its seed is
/// replaced per trial).
struct ExperimentGrid {
  SweepSpec sweep;
  GeneratorSpec generator;

  void validate() const;
};

/// Experiment on a fully known matrix, optionally subsampling rows per trial.
struct RealMatrixSweep {
  SweepSpec sweep;
  MatrixXd matrix;
  Index rows_per_trial = 0;  // 0 = use every row

  void validate() const;
};

struct Cell {
  std::size_t zero_index = 0;
  std::size_t nonzero_index = 0;
  double rate_zero = 0.0;
  double rate_nonzero = 0.0;
};

struct TrialRecord {
  Cell cell;
  int trial_index = 0;
  double alpha_used = 0.0;
  ErrorRatio ratio;
  double err_reg = 0.0;
  double err_nnm = 0.0;
  SolveStatus status_nnm = SolveStatus::Converged;
  SolveStatus status_reg = SolveStatus::Converged;
  double rho = 0.0;  // 0 in noiseless runs
  std::size_t observed = 0;
  int redraws = 0;
  std::vector<double> errors_per_alpha;  // same order as SweepSpec::alphas
  std::string failure;                   // nonempty when the trial could not run

  bool failed() const { return !failure.empty(); }
};

struct CellSummary {
  Cell cell;
  double mean_ratio = 0.0;  // over finite ratios only; NaN if there are none
  double mean_alpha = 0.0;  // over trials that ran; NaN if none did
  std::size_t finite = 0;
  std::size_t both_exact = 0;
  std::size_t infinite = 0;
  std::size_t failed = 0;
};

struct GridTable {
  std::vector<double> zero_rates;
  std::vector<double> nonzero_rates;
  std::vector<CellSummary> cells;  // row-major: zero rate index, then nonzero
  std::vector<TrialRecord> records;  // cell-major, then trial

  const CellSummary& at(std::size_t zero_index, std::size_t nonzero_index) const {
    return cells.at(zero_index * nonzero_rates.size() + nonzero_index);
  }
};

/// Hard failure of one trial, tagged with its coordinates.
class CellError : public std::runtime_error {
 public:
  CellError(const Cell& cell, int trial, const std::string& what);
  const Cell& cell() const { return cell_; }
  int trial() const { return trial_; }

 private:
  Cell cell_;
  int trial_;
};

inline constexpr int kMaxRedraws = 8;

/// Seed for one (cell, trial, purpose, attempt). Cells are keyed by their
/// rate values, so adding rates to a sweep leaves existing cells' draws alone.
std::uint64_t trial_seed(std::uint64_t base_seed, const Cell& cell, int trial, rng::Purpose purpose, int attempt);

TrialRecord run_cell(const ExperimentGrid& grid, const Cell& cell, int trial_index);
GridTable run_grid(const ExperimentGrid& grid);

TrialRecord run_real_cell(const RealMatrixSweep& sweep, const Cell& cell, int trial_index);
GridTable run_real_matrix(const RealMatrixSweep& sweep);

/// Rows chosen for one trial of a real-matrix sweep, ascending.
std::vector<Index> subsample_rows(Index total, Index count, std::uint64_t seed);

/// Mean of finite ratios and of alpha_used, with outcome counts.
CellSummary summarize(const Cell& cell, const std::vector<TrialRecord>& records);

}  // namespace smc
