#include "smc/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "smc/errors.hpp"
#include "smc/random.hpp"

namespace smc {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

MatrixXd sparse_factor(Index rows, Index cols, double density, rng::Stream& stream) {
  MatrixXd f = MatrixXd::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (stream.uniform() < density) f(i, j) = stream.uniform_open();
  return f;
}

void shuffle(std::vector<ObservationMask::Entry>& v, rng::Stream& stream) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("GeneratorSpec: dimensions must be positive");
  if (rank < 1 || rank > std::min(n1, n2))
    throw std::invalid_argument("GeneratorSpec: rank must lie in [1, min(n1, n2)]");
  // zero density is allowed here: it yields the zero matrix, which callers reject as degenerate
  if (!in_unit_interval(density_left) || !in_unit_interval(density_right))
    throw std::invalid_argument("GeneratorSpec: densities must lie in [0, 1]");
}

void SamplingSpec::validate() const {
  if (!in_unit_interval(rate_zero) || !in_unit_interval(rate_nonzero))
    throw std::invalid_argument("SamplingSpec: rates must lie in [0, 1]");
}

std::size_t round_half_even(double x) { return static_cast<std::size_t>(std::nearbyint(x)); }

MatrixXd generate_low_rank(const GeneratorSpec& spec) {
  spec.validate();
  rng::Stream stream(spec.seed);
  const MatrixXd left = sparse_factor(spec.n1, spec.rank, spec.density_left, stream);
  const MatrixXd right = sparse_factor(spec.rank, spec.n2, spec.density_right, stream);
  return left * right;
}

ObservationMask sample_structured_mask(const MatrixXd& m, const SamplingSpec& spec) {
  spec.validate();
  std::vector<ObservationMask::Entry> zeros;
  std::vector<ObservationMask::Entry> nonzeros;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) (m(i, j) == 0.0 ? zeros : nonzeros).emplace_back(i, j);

  rng::Stream stream(spec.seed);
  shuffle(zeros, stream);
  shuffle(nonzeros, stream);
  zeros.resize(round_half_even(spec.rate_zero * static_cast<double>(zeros.size())));
  nonzeros.resize(round_half_even(spec.rate_nonzero * static_cast<double>(nonzeros.size())));

  std::vector<ObservationMask::Entry> observed = std::move(zeros);
  observed.insert(observed.end(), nonzeros.begin(), nonzeros.end());
  if (observed.empty())
    throw SamplingError("sample_structured_mask: no entries observed at rates (" + std::to_string(spec.rate_zero) +
                        ", " + std::to_string(spec.rate_nonzero) + ")");
  return ObservationMask(m.rows(), m.cols(), std::move(observed));
}

MatrixXd add_noise(const MatrixXd& m, double sigma, const ObservationMask& mask, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  detail::check_shape(m, mask, "add_noise");
  MatrixXd out = m;
  if (sigma == 0.0) return out;
  rng::Stream stream(seed);
  for (const auto& [i, j] : mask.entries()) out(i, j) += sigma * stream.normal();
  return out;
}

double rho_for_noise(Index n1, Index n2, std::size_t omega_size, double sigma) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("rho_for_noise: dimensions must be positive");
  if (omega_size < 1) throw std::invalid_argument("rho_for_noise: need at least one observed entry");
  if (!(sigma > 0.0)) throw std::invalid_argument("rho_for_noise: sigma must be positive");
  const double d1 = static_cast<double>(n1);
  const double d2 = static_cast<double>(n2);
  return (std::sqrt(d1) + std::sqrt(d2)) * std::sqrt(static_cast<double>(omega_size) / (d1 * d2)) * sigma;
}

}  // namespace smc
