#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace gcfrft {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kJ{0.0, 1.0};

/// ||M^H M - I||_F
inline double unitarity_error(const CMatrix& m) {
  const CMatrix gram = m.adjoint() * m;
  return (gram - CMatrix::Identity(m.cols(), m.cols())).norm();
}

/// ||a - b||_F / ||b||_F, falling back to the absolute error when b vanishes.
template <typename A, typename B>
double relative_error(const A& a, const B& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const CMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

}  // namespace gcfrft
