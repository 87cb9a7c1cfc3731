#include "smc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "smc/errors.hpp"
#include "smc/harness.hpp"
#include "smc/io/config.hpp"
#include "smc/io/csv.hpp"
#include "smc/io/report.hpp"
#include "smc/random.hpp"
#include "smc/solvers.hpp"
#include "smc/synth.hpp"

#ifndef SMC_VERSION
#define SMC_VERSION "0.0.0"
#endif

namespace smc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json solver_json(const SolverConfig& s) {
  return {{"max_iters", s.max_iters},
          {"primal_tol", s.primal_tol},
          {"dual_tol", s.dual_tol},
          {"admm_penalty", s.admm_penalty},
          {"adaptive_penalty", s.adaptive_penalty}};
}

void add_solver_flags(CLI::App& cmd, SolverConfig& s) {
  cmd.add_option("--max-iters", s.max_iters, "ADMM iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--primal-tol", s.primal_tol, "primal residual tolerance (scaled by sqrt(n1*n2))")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--dual-tol", s.dual_tol, "dual residual tolerance (scaled by sqrt(n1*n2))")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--penalty", s.admm_penalty, "initial ADMM penalty")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_flag("!--no-adapt", s.adaptive_penalty, "disable residual-balancing penalty updates");
}

// ---------------------------------------------------------------- complete

struct CompleteArgs {
  std::string input;
  std::string mask;
  std::string formulation = "nnm-exact";
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<double> sigma;
  std::string output;
  std::string diagnostics;
  std::string sparse_output;
  SolverConfig solver;
};

int cmd_complete(const CompleteArgs& a, std::ostream& out) {
  const auto formulation = parse_formulation(a.formulation);
  if (!formulation) throw UsageError("unknown formulation '" + a.formulation + "'");
  const std::string name(to_string(*formulation));
  if (a.alpha && !uses_alpha(*formulation)) throw UsageError("--alpha is not used by " + name);
  if (!a.alpha && uses_alpha(*formulation)) throw UsageError(name + " requires --alpha");
  if ((a.rho || a.sigma) && !uses_rho(*formulation)) throw UsageError("--rho/--sigma are not used by " + name);
  if (a.rho && a.sigma) throw UsageError("give either --rho or --sigma, not both");
  if (uses_rho(*formulation) && !a.rho && !a.sigma) throw UsageError(name + " requires --rho or --sigma");
  if (!a.sparse_output.empty() && *formulation != Formulation::RpcaRestricted)
    throw UsageError("--sparse-output is only produced by rpca-restricted");

  io::CsvMatrix data = io::ingest_matrix_csv(a.input, io::EmptyCellPolicy::Mask);
  ObservationMask mask = *data.mask;
  if (!a.mask.empty()) {
    ObservationMask given = io::read_mask_csv(a.mask, data.values.rows(), data.values.cols());
    for (const auto& [i, j] : given.entries())
      if (!mask.contains(i, j))
        throw ParseError("mask lists an entry whose cell is empty in " + a.input, static_cast<std::size_t>(i),
                         static_cast<std::size_t>(j));
    mask = std::move(given);
  }
  if (mask.empty()) throw ParseError("no observed entries in " + a.input);

  double rho = a.rho.value_or(0.0);
  if (a.sigma) rho = rho_for_noise(data.values.rows(), data.values.cols(), mask.size(), *a.sigma);
  const CompletionProblem<double> problem(data.values, mask, *formulation, a.alpha.value_or(0.0), rho);

  SolveResult<double> result;
  std::optional<MatrixXd> sparse;
  if (*formulation == Formulation::RpcaRestricted) {
    RpcaResult<double> r = solve_rpca_restricted(problem, a.solver);
    result = std::move(r.low_rank);
    sparse = std::move(r.sparse);
  } else {
    result = solve(problem, a.solver);
  }

  json diag = {{"formulation", name},
               {"rows", problem.rows()},
               {"cols", problem.cols()},
               {"observed", mask.size()},
               {"alpha", problem.alpha()},
               {"rho", problem.rho()},
               {"sigma", a.sigma ? json(*a.sigma) : json(nullptr)},
               {"status", std::string(to_string(result.status))},
               {"objective", result.objective},
               {"iterations", result.iterations},
               {"primal_residual", result.primal_residual},
               {"dual_residual", result.dual_residual},
               {"rank_estimate", result.rank_estimate},
               {"final_penalty", result.final_penalty},
               {"solver", solver_json(a.solver)}};
  if (!result.message.empty()) diag["message"] = result.message;

  if (result.status != SolveStatus::NumericalFailure) {
    io::write_matrix_csv(fs::path(a.output), result.completed);
    if (sparse && !a.sparse_output.empty()) io::write_matrix_csv(fs::path(a.sparse_output), *sparse);
  }
  const fs::path diag_path = a.diagnostics.empty() ? fs::path(a.output + ".json") : fs::path(a.diagnostics);
  write_json(diag_path, diag);

  out << name << ": " << to_string(result.status) << " after " << result.iterations << " iterations, objective "
      << io::format_double(result.objective) << ", rank " << result.rank_estimate << '\n';
  if (result.status == SolveStatus::NumericalFailure) throw NumericalError(result.message);
  return kOk;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  GeneratorSpec generator;
  double rate_zero = 1.0;
  double rate_nonzero = 1.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string matrix;
  std::string mask;
  std::string observed;
  std::string manifest;
};

int cmd_generate(GenerateArgs a, std::ostream& out) {
  const std::uint64_t truth_seed = rng::derive_key(a.seed, {static_cast<std::uint64_t>(rng::Purpose::Truth)});
  const std::uint64_t mask_seed = rng::derive_key(a.seed, {static_cast<std::uint64_t>(rng::Purpose::Mask)});
  const std::uint64_t noise_seed = rng::derive_key(a.seed, {static_cast<std::uint64_t>(rng::Purpose::Noise)});
  a.generator.seed = truth_seed;
  try {
    a.generator.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(a.rate_zero >= 0 && a.rate_zero <= 1 && a.rate_nonzero >= 0 && a.rate_nonzero <= 1))
    throw UsageError("sampling rates must lie in [0, 1]");
  if (!(a.sigma >= 0)) throw UsageError("--sigma must be >= 0");

  const MatrixXd truth = generate_low_rank(a.generator);
  if (truth.isZero(0.0)) throw DegenerateDrawError("generated matrix is all zeros; change the seed or densities");
  const ObservationMask mask = sample_structured_mask(truth, {a.rate_zero, a.rate_nonzero, mask_seed});
  const MatrixXd observed = add_noise(truth, a.sigma, mask, noise_seed);

  io::write_matrix_csv(fs::path(a.matrix), truth);
  if (!a.mask.empty()) io::write_mask_csv(fs::path(a.mask), mask);
  if (!a.observed.empty()) io::write_matrix_csv(fs::path(a.observed), observed, &mask);

  const json manifest = {{"tool", "smc generate"},
                         {"version", SMC_VERSION},
                         {"n1", a.generator.n1},
                         {"n2", a.generator.n2},
                         {"rank", a.generator.rank},
                         {"density_left", a.generator.density_left},
                         {"density_right", a.generator.density_right},
                         {"rate_zero", a.rate_zero},
                         {"rate_nonzero", a.rate_nonzero},
                         {"sigma", a.sigma},
                         {"seed", a.seed},
                         {"truth_seed", truth_seed},
                         {"mask_seed", mask_seed},
                         {"noise_seed", noise_seed},
                         {"observed", mask.size()},
                         {"nonzeros", static_cast<std::size_t>((truth.array() != 0.0).count())},
                         {"files", {{"matrix", a.matrix}, {"mask", a.mask}, {"observed", a.observed}}}};
  if (!a.manifest.empty()) write_json(a.manifest, manifest);
  out << "generated " << a.generator.n1 << "x" << a.generator.n2 << " rank-" << a.generator.rank << " matrix, "
      << mask.size() << " observed entries\n";
  return kOk;
}

// --------------------------------------------------------------- benchmark

fs::path with_rank_suffix(const std::string& name, Index rank, bool suffix) {
  if (!suffix) return name;
  const fs::path p(name);
  return p.stem().string() + "_rank" + std::to_string(rank) + p.extension().string();
}

json config_json(const io::BenchmarkConfig& c) {
  json j = {{"kind", c.kind == io::ExperimentKind::Synthetic ? "synthetic" : "real"},
            {"trials", c.sweep.trials},
            {"base_seed", c.sweep.base_seed},
            {"noise_sigma", c.sweep.noise_sigma},
            {"alphas", c.sweep.alphas},
            {"zero_rates", c.sweep.zero_rates},
            {"nonzero_rates", c.sweep.nonzero_rates},
            {"solver", solver_json(c.sweep.solver)}};
  if (c.kind == io::ExperimentKind::Synthetic) {
    j["generator"] = {{"n1", c.generator.n1},
                      {"n2", c.generator.n2},
                      {"ranks", c.ranks},
                      {"density_left", c.generator.density_left},
                      {"density_right", c.generator.density_right}};
  } else {
    j["real"] = {{"matrix", c.matrix.string()}, {"rows_per_trial", c.rows_per_trial}};
  }
  return j;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir, std::optional<int> threads,
                  std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  io::BenchmarkConfig cfg = io::load_config(config_path);
  if (threads) cfg.sweep.threads = *threads;
  cfg.sweep.keep_going = true;
  fs::create_directories(out_dir);

  auto results = open_out(fs::path(out_dir) / cfg.output.results);
  io::write_results_header(results);
  json runs = json::array();

  const auto emit = [&](const GridTable& table, std::optional<Index> rank, bool suffix) {
    io::write_results_rows(results, table, rank);
    const Index r = rank.value_or(0);
    const fs::path ratio_name = with_rank_suffix(cfg.output.heatmap_ratio, r, suffix);
    const fs::path alpha_name = with_rank_suffix(cfg.output.heatmap_alpha, r, suffix);
    auto ratio = open_out(fs::path(out_dir) / ratio_name);
    io::write_heatmap_csv(ratio, table, io::HeatmapValue::MeanRatio);
    auto alpha = open_out(fs::path(out_dir) / alpha_name);
    io::write_heatmap_csv(alpha, table, io::HeatmapValue::MeanAlpha);
    json run = {{"heatmap_ratio", ratio_name.string()},
                {"heatmap_alpha", alpha_name.string()},
                {"summary", io::summary_json(table)}};
    if (rank) run["rank"] = *rank;
    runs.push_back(run);
  };

  if (cfg.kind == io::ExperimentKind::Synthetic) {
    for (Index rank : cfg.ranks) {
      ExperimentGrid grid{cfg.sweep, cfg.generator};
      grid.generator.rank = rank;
      emit(run_grid(grid), rank, cfg.ranks.size() > 1);
      out << "rank " << rank << ": done\n";
    }
  } else {
    RealMatrixSweep sweep{cfg.sweep, io::ingest_matrix_csv(cfg.matrix, io::EmptyCellPolicy::Strict).values,
                          cfg.rows_per_trial};
    emit(run_real_matrix(sweep), std::nullopt, false);
  }
  results.close();

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const json manifest = {{"tool", "smc benchmark"},
                         {"version", SMC_VERSION},
                         {"config_file", config_path},
                         {"config", config_json(cfg)},
                         {"results", cfg.output.results},
                         {"runs", runs},
                         {"threads", cfg.sweep.threads},
                         {"wall_time_seconds", wall}};
  write_json(fs::path(out_dir) / cfg.output.manifest, manifest);
  out << "wrote " << (fs::path(out_dir) / cfg.output.results).string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix completion with structured observations", "smc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SMC_VERSION);

  CompleteArgs complete;
  CLI::App* c = app.add_subcommand("complete", "Complete a matrix CSV (empty cells are unobserved)");
  c->add_option("-i,--input", complete.input, "matrix CSV; empty cells mark unobserved entries")->required();
  c->add_option("--mask", complete.mask,
                "mask CSV ('row,col' header, zero-based pairs); default: infer from empty cells");
  c->add_option("-f,--formulation", complete.formulation,
                "nnm-exact | nnm-reg | nnm-noisy | nnm-noisy-reg | rpca-restricted")
      ->capture_default_str();
  c->add_option("--alpha", complete.alpha, "L1 weight (nnm-reg, nnm-noisy-reg, rpca-restricted)")
      ->check(CLI::PositiveNumber);
  c->add_option("--rho", complete.rho, "nuclear-norm weight (nnm-noisy, nnm-noisy-reg)")->check(CLI::PositiveNumber);
  c->add_option("--sigma", complete.sigma, "noise level; sets rho = (sqrt(n1)+sqrt(n2)) sqrt(|obs|/(n1 n2)) sigma")
      ->check(CLI::PositiveNumber);
  c->add_option("-o,--output", complete.output, "completed matrix CSV")->required();
  c->add_option("--diagnostics", complete.diagnostics, "diagnostics JSON (default: <output>.json)");
  c->add_option("--sparse-output", complete.sparse_output, "sparse part CSV (rpca-restricted)");
  add_solver_flags(*c, complete.solver);

  GenerateArgs generate;
  CLI::App* g = app.add_subcommand("generate", "Draw a sparse-factor low-rank matrix and a structured mask");
  g->add_option("--n1", generate.generator.n1, "rows")->capture_default_str();
  g->add_option("--n2", generate.generator.n2, "columns")->capture_default_str();
  g->add_option("--rank", generate.generator.rank, "factor rank")->capture_default_str();
  g->add_option("--density-left", generate.generator.density_left, "nonzero probability of left factor entries")
      ->capture_default_str();
  g->add_option("--density-right", generate.generator.density_right, "nonzero probability of right factor entries")
      ->capture_default_str();
  g->add_option("--rate-zero", generate.rate_zero, "fraction of zero entries observed")->capture_default_str();
  g->add_option("--rate-nonzero", generate.rate_nonzero, "fraction of nonzero entries observed")
      ->capture_default_str();
  g->add_option("--sigma", generate.sigma, "Gaussian noise on observed entries")->capture_default_str();
  g->add_option("--seed", generate.seed, "master seed")->capture_default_str();
  g->add_option("--matrix", generate.matrix, "ground-truth matrix CSV")->required();
  g->add_option("--mask", generate.mask, "mask CSV");
  g->add_option("--observed", generate.observed, "observed matrix CSV with empty unobserved cells");
  g->add_option("--manifest", generate.manifest, "manifest JSON");

  std::string config_path;
  std::string out_dir;
  std::optional<int> threads;
  CLI::App* b = app.add_subcommand("benchmark", "Run a sampling-rate sweep from a config file");
  b->add_option("-c,--config", config_path, "config file (see docs/config.md)")->required();
  b->add_option("-o,--out-dir", out_dir, "output directory")->required();
  b->add_option("--threads", threads, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (c->parsed()) return cmd_complete(complete, out);
    if (g->parsed()) return cmd_generate(generate, out);
    return cmd_benchmark(config_path, out_dir, threads, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace smc::cli
