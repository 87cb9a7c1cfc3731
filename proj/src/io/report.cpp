#include "smc/io/report.hpp"

#include <ostream>

#include "smc/io/csv.hpp"

namespace smc::io {

void write_results_header(std::ostream& out) {
  out << "rank,rate_zero,rate_nonzero,trial,alpha,err_reg,err_nnm,ratio,outcome,status_nnm,status_reg,observed,rho,"
         "redraws,failure\n";
}

namespace {

/// Failure messages go in the last column; commas and newlines would break it.
std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

void write_results_rows(std::ostream& out, const GridTable& table, std::optional<Index> rank) {
  for (const TrialRecord& r : table.records) {
    if (rank) out << *rank;
    out << ',' << format_double(r.cell.rate_zero) << ',' << format_double(r.cell.rate_nonzero) << ','
        << r.trial_index << ',';
    if (r.failed()) {
      out << ",,,,failed,,,,,," << sanitize(r.failure) << '\n';
      continue;
    }
    out << format_double(r.alpha_used) << ',' << format_double(r.err_reg) << ',' << format_double(r.err_nnm) << ',';
    if (r.ratio.finite()) out << format_double(r.ratio.value);
    out << ',' << to_string(r.ratio.outcome) << ',' << to_string(r.status_nnm) << ',' << to_string(r.status_reg)
        << ',' << r.observed << ',' << format_double(r.rho) << ',' << r.redraws << ",\n";
  }
}

void write_heatmap_csv(std::ostream& out, const GridTable& table, HeatmapValue value) {
  out << "rate_zero\\rate_nonzero";
  for (double nz : table.nonzero_rates) out << ',' << format_double(nz);
  out << '\n';
  for (std::size_t i = 0; i < table.zero_rates.size(); ++i) {
    out << format_double(table.zero_rates[i]);
    for (std::size_t j = 0; j < table.nonzero_rates.size(); ++j) {
      const CellSummary& c = table.at(i, j);
      out << ',' << format_double(value == HeatmapValue::MeanRatio ? c.mean_ratio : c.mean_alpha);
    }
    out << '\n';
  }
}

nlohmann::json summary_json(const GridTable& table) {
  std::size_t finite = 0, both_exact = 0, infinite = 0, failed = 0;
  for (const auto& c : table.cells) {
    finite += c.finite;
    both_exact += c.both_exact;
    infinite += c.infinite;
    failed += c.failed;
  }
  return {{"cells", table.cells.size()},
          {"trials_total", table.records.size()},
          {"finite_ratios", finite},
          {"both_exact", both_exact},
          {"infinite", infinite},
          {"failed", failed}};
}

}  // namespace smc::io
