#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smc {

/// SVD breakdown or non-finite values produced during a solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV / config input. Row and column are zero-based; npos when
/// not applicable.
class ParseError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ParseError(const std::string& what, std::size_t row = npos, std::size_t col = npos)
      : std::runtime_error(format(what, row, col)), row_(row), col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t col) {
    std::string out = what;
    if (row != npos) {
      out += " (row " + std::to_string(row);
      if (col != npos) out += ", col " + std::to_string(col);
      out += ")";
    }
    return out;
  }

  std::size_t row_;
  std::size_t col_;
};

/// Sampling produced an empty observation set.
class SamplingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A generated ground truth is unusable (all zeros).
class DegenerateDrawError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request outside what a routine supports (e.g. oracle size budget).
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace smc
