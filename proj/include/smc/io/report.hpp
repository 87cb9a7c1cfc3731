#pragma once

// Benchmark outputs.
//
// results.csv: one row per trial, columns
//   rank,rate_zero,rate_nonzero,trial,alpha,err_reg,err_nnm,ratio,outcome,
//   status_nnm,status_reg,observed,rho,redraws,failure
// `rank` is empty for real-matrix sweeps; `ratio` is empty unless outcome is
// "ratio". Failed trials keep their coordinates and carry the message in
// `failure`.
//
// Heatmaps: first row "rate_zero\rate_nonzero" followed by the nonzero rates;
// each further row is a zero rate followed by one value per nonzero rate.
// Cells with no finite value hold "nan".

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "smc/harness.hpp"

namespace smc::io {

void write_results_header(std::ostream& out);
void write_results_rows(std::ostream& out, const GridTable& table, std::optional<Index> rank);

enum class HeatmapValue { MeanRatio, MeanAlpha };
void write_heatmap_csv(std::ostream& out, const GridTable& table, HeatmapValue value);

nlohmann::json summary_json(const GridTable& table);

}  // namespace smc::io
