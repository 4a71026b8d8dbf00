#pragma once

// Synthetic band-limited time-vertex signals and additive white noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "gcfrft/error.hpp"
#include "gcfrft/fractional.hpp"
#include "gcfrft/graph.hpp"
#include "gcfrft/transforms.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

namespace detail {
inline Index band_modes(double bandwidth, Index n) {
  return std::clamp<Index>(static_cast<Index>(std::ceil(bandwidth * static_cast<double>(n) - 1e-12)),
                           1, n);
}

inline Matrix temporal_modes(Index n2) {
  if (n2 == 1) return Matrix::Ones(1, 1);
  return eigendecompose(path_graph(n2)).v;
}
}  // namespace detail

/// Standard normal coefficients on the first ceil(b n1) spatial modes and
/// first ceil(b n2) path-graph modes (descending eigenvalue order), scaled
/// so that ||X||_F^2 = n1 n2.
inline TimeVertexSignal synth_signal(const Graph& g1, Index n2, double bandwidth,
                                     std::uint64_t seed) {
  if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
    throw Error(ErrorCode::domain, "bandwidth must lie in (0, 1]");
  }
  if (n2 < 1) throw Error(ErrorCode::invalid_size, "n2 must be >= 1");
  const Index n1 = g1.size();
  const Matrix v1 = eigendecompose(g1).v;
  const Matrix v2 = detail::temporal_modes(n2);
  const Index m1 = detail::band_modes(bandwidth, n1);
  const Index m2 = detail::band_modes(bandwidth, n2);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix coeffs(m1, m2);
  for (Index i = 0; i < m1; ++i) {
    for (Index j = 0; j < m2; ++j) coeffs(i, j) = normal(rng);
  }
  Matrix x = v1.leftCols(m1) * coeffs * v2.leftCols(m2).transpose();
  const double norm2 = x.squaredNorm();
  if (norm2 > 0.0) x *= std::sqrt(static_cast<double>(n1 * n2) / norm2);
  return TimeVertexSignal::from_real(x);
}

/// Y = X + sigma Z with Z i.i.d. standard normal (real part only for real X;
/// independent real and imaginary parts, each of variance sigma^2 / 2, for
/// complex X).
inline TimeVertexSignal add_awgn(const TimeVertexSignal& x, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::domain, "noise level must be finite and >= 0");
  }
  TimeVertexSignal y = x;
  if (sigma == 0.0) return y;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double imag_scale = std::sqrt(0.5);
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < y.rows(); ++i) {
      if (x.real_flag) {
        y.data(i, j) += sigma * normal(rng);
      } else {
        const double re = normal(rng);
        const double im = normal(rng);
        y.data(i, j) += sigma * imag_scale * Complex(re, im);
      }
    }
  }
  return y;
}

}  // namespace gcfrft
