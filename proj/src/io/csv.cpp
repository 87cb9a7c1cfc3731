#include "smc/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "smc/errors.hpp"

namespace smc::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t row, std::size_t col) {
  std::string_view t = text;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError("not a number: '" + std::string(text) + "'", row, col);
  if (!std::isfinite(value)) throw ParseError("non-finite value '" + std::string(text) + "'", row, col);
  return value;
}

CsvMatrix read_matrix_csv(std::istream& in, EmptyCellPolicy policy) {
  const std::vector<std::string> lines = read_lines(in);
  if (lines.empty()) throw ParseError("empty matrix file");

  std::vector<std::vector<std::string_view>> rows;
  for (const auto& line : lines) rows.push_back(split(line));
  const std::size_t cols = rows.front().size();

  MatrixXd values(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  BoolArray observed = BoolArray::Constant(values.rows(), values.cols(), true);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw ParseError("ragged row: expected " + std::to_string(cols) + " cells, found " +
                           std::to_string(rows[i].size()),
                       i);
    for (std::size_t j = 0; j < cols; ++j) {
      const auto ii = static_cast<Index>(i);
      const auto jj = static_cast<Index>(j);
      if (rows[i][j].empty()) {
        if (policy == EmptyCellPolicy::Strict) throw ParseError("empty cell", i, j);
        values(ii, jj) = 0.0;
        observed(ii, jj) = false;
      } else {
        values(ii, jj) = parse_double(rows[i][j], i, j);
      }
    }
  }

  CsvMatrix out{std::move(values), std::nullopt};
  if (policy == EmptyCellPolicy::Mask) out.mask = ObservationMask(std::move(observed));
  return out;
}

CsvMatrix ingest_matrix_csv(const std::filesystem::path& path, EmptyCellPolicy policy) {
  auto in = open_in(path);
  try {
    return read_matrix_csv(in, policy);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(std::ostream& out, const MatrixXd& m, const ObservationMask* mask) {
  if (mask) detail::check_shape(m, *mask, "write_matrix_csv");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      if (!mask || mask->contains(i, j)) out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& m, const ObservationMask* mask) {
  auto out = open_out(path);
  write_matrix_csv(out, m, mask);
}

ObservationMask read_mask_csv(std::istream& in, Index rows, Index cols) {
  const std::vector<std::string> lines = read_lines(in);
  if (lines.empty() || trim(lines.front()) != "row,col") throw ParseError("mask file must start with header 'row,col'", 0);
  std::vector<ObservationMask::Entry> entries;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split(lines[k]);
    if (cells.size() != 2) throw ParseError("expected two cells 'row,col'", k);
    Index idx[2];
    for (std::size_t c = 0; c < 2; ++c) {
      long long v = -1;
      const auto res = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (cells[c].empty() || res.ec != std::errc() || res.ptr != cells[c].data() + cells[c].size())
        throw ParseError("not an index: '" + std::string(cells[c]) + "'", k, c);
      idx[c] = static_cast<Index>(v);
    }
    entries.emplace_back(idx[0], idx[1]);
  }
  try {
    return ObservationMask(rows, cols, std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

ObservationMask read_mask_csv(const std::filesystem::path& path, Index rows, Index cols) {
  auto in = open_in(path);
  try {
    return read_mask_csv(in, rows, cols);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_mask_csv(std::ostream& out, const ObservationMask& mask) {
  out << "row,col\n";
  for (const auto& [i, j] : mask.entries()) out << i << ',' << j << '\n';
}

void write_mask_csv(const std::filesystem::path& path, const ObservationMask& mask) {
  auto out = open_out(path);
  write_mask_csv(out, mask);
}

}  // namespace smc::io
