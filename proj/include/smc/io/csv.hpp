#pragma once

// Matrix CSV convention: no header, one matrix row per line, comma-separated
// decimal numbers. An empty cell marks an unobserved entry.
//
// Mask CSV convention: header line "row,col", then one zero-based index pair
// per line.
//
// Numbers are written in the shortest form that parses back to the same
// double (at most 17 significant digits).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "smc/matrix_core.hpp"

namespace smc::io {

enum class EmptyCellPolicy {
  Mask,   // empty cells become unobserved, stored as 0
  Strict  // empty cells are a parse error
};

struct CsvMatrix {
  MatrixXd values;
  std::optional<ObservationMask> mask;  // set under EmptyCellPolicy::Mask
};

std::string format_double(double x);

/// Throws ParseError with a zero-based location.
double parse_double(std::string_view text, std::size_t row, std::size_t col);

CsvMatrix read_matrix_csv(std::istream& in, EmptyCellPolicy policy);
CsvMatrix ingest_matrix_csv(const std::filesystem::path& path, EmptyCellPolicy policy);

/// Writes every entry, or leaves unobserved cells empty when a mask is given.
void write_matrix_csv(std::ostream& out, const MatrixXd& m, const ObservationMask* mask = nullptr);
void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& m, const ObservationMask* mask = nullptr);

ObservationMask read_mask_csv(std::istream& in, Index rows, Index cols);
ObservationMask read_mask_csv(const std::filesystem::path& path, Index rows, Index cols);
void write_mask_csv(std::ostream& out, const ObservationMask& mask);
void write_mask_csv(const std::filesystem::path& path, const ObservationMask& mask);

}  // namespace smc::io
