#include "idde/dataset.hpp"
#include "idde/error.hpp"

#include "random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace idde {
namespace {

void require_rows(std::size_t n) {
  if (n < 2) {
    throw UsageError("generators need n >= 2, got " + std::to_string(n));
  }
}

} // namespace

Dataset gen_circle(std::size_t n, std::uint64_t seed) {
  require_rows(n);
  detail::Engine rng(seed);
  std::vector<double> values(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = detail::unit_uniform(rng);
    const double v = detail::unit_uniform(rng);
    const double phase = 2.0 * std::numbers::pi * u;
    values[3 * i] = std::sin(phase);
    values[3 * i + 1] = std::cos(phase);
    values[3 * i + 2] = 0.1 * v;
  }
  return Dataset(std::move(values), n, 3);
}

Dataset gen_sinusoid(std::size_t n, std::uint64_t seed) {
  require_rows(n);
  detail::Engine rng(seed);
  std::vector<double> values(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = detail::unit_uniform(rng);
    const double phase = 2.0 * std::numbers::pi * u;
    values[3 * i] = std::sin(phase);
    values[3 * i + 1] = std::cos(phase);
    values[3 * i + 2] = 0.1 * std::sin(300.0 * std::numbers::pi * u);
  }
  return Dataset(std::move(values), n, 3);
}

Dataset gen_hypercube(std::size_t n, std::size_t d, std::size_t ambient, std::uint64_t seed,
                      HypercubeOptions options) {
  require_rows(n);
  if (d < 1 || d > ambient) {
    throw UsageError("hypercube needs 1 <= d <= D, got d=" + std::to_string(d) + ", D=" + std::to_string(ambient));
  }
  detail::Engine rng(seed);
  std::vector<double> values(n * ambient, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      values[i * ambient + k] = detail::unit_uniform(rng);
    }
  }
  if (!options.rotate) {
    return Dataset(std::move(values), n, ambient);
  }

  // Orthonormal factor of a Gaussian matrix, sign-fixed so the draw is
  // Haar distributed.
  const auto dim = static_cast<Eigen::Index>(ambient);
  Eigen::MatrixXd gauss(dim, dim);
  std::normal_distribution<double> normal;
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      gauss(r, c) = normal(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd rfac = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < dim; ++c) {
    if (rfac(c, c) < 0) q.col(c) = -q.col(c);
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajor> points(values.data(), static_cast<Eigen::Index>(n), dim);
  const RowMajor rotated = points * q.transpose();
  std::vector<double> out(rotated.data(), rotated.data() + rotated.size());
  return Dataset(std::move(out), n, ambient);
}

Dataset gen_noisy_segment(std::size_t n, std::span<const double> direction, double noise_amplitude,
                          std::uint64_t seed) {
  require_rows(n);
  if (direction.empty()) {
    throw UsageError("segment direction must have at least one coordinate");
  }
  bool nonzero = false;
  for (double c : direction) {
    if (!std::isfinite(c)) throw UsageError("segment direction must be finite");
    nonzero = nonzero || c != 0.0;
  }
  if (!nonzero) {
    throw UsageError("segment direction must be a non-zero vector");
  }
  if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude)) {
    throw UsageError("noise amplitude must be finite and >= 0");
  }

  const std::size_t dim = direction.size();
  detail::Engine rng(seed);
  std::vector<double> values(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = detail::unit_uniform(rng);
    for (std::size_t k = 0; k < dim; ++k) {
      double x = t * direction[k];
      if (noise_amplitude > 0.0) {
        x += noise_amplitude * (2.0 * detail::unit_uniform(rng) - 1.0);
      }
      values[i * dim + k] = x;
    }
  }
  return Dataset(std::move(values), n, dim);
}

} // namespace idde
