#pragma once

#include <cstdint>

#include "smc/matrix_core.hpp"

namespace smc {

/// Sparse-factor generator: M = L * R with L (n1 x rank) and R (rank x n2).
/// Each factor entry is nonzero independently with the given density, and
/// nonzero values are uniform on (0, 1).
struct GeneratorSpec {
  Index n1 = 30;
  Index n2 = 30;
  Index rank = 2;
  double density_left = 0.3;
  double density_right = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fractions of the zero and nonzero entries of a matrix to observe.
struct SamplingSpec {
  double rate_zero = 0.0;
  double rate_nonzero = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draw order (one stream keyed by spec.seed): left factor entries in
/// row-major order, then right factor entries in row-major order. Each entry
/// consumes one uniform for inclusion and, if included, one open uniform for
/// its value. A density of 0 yields the zero matrix.
MatrixXd generate_low_rank(const GeneratorSpec& spec);

/// Observes round(rate_zero * #zeros) zero entries and
/// round(rate_nonzero * #nonzeros) nonzero entries (round half to even).
/// Each class is listed in row-major order and Fisher-Yates shuffled with a
/// stream keyed by spec.seed (zeros first); a shuffled prefix is kept.
/// Throws SamplingError if the result is empty.
ObservationMask sample_structured_mask(const MatrixXd& m, const SamplingSpec& spec);

/// m + sigma * Z on observed entries only; Z is drawn per observed entry in
/// row-major order from a stream keyed by seed. Unobserved entries are
/// returned bit-identical.
MatrixXd add_noise(const MatrixXd& m, double sigma, const ObservationMask& mask, std::uint64_t seed);

/// (sqrt(n1) + sqrt(n2)) * sqrt(|obs| / (n1 n2)) * sigma
double rho_for_noise(Index n1, Index n2, std::size_t omega_size, double sigma);

/// Nearest integer to x, ties to even.
std::size_t round_half_even(double x);

}  // namespace smc
