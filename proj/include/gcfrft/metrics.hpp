#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include "gcfrft/error.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

struct MetricValues {
  double mse = 0.0;
  double psnr = 0.0;  // +infinity when mse == 0
  double ssim = 0.0;
};

/// MSE, PSNR and single-window SSIM between real matrices. MAX defaults to
/// max |x_true|.
inline MetricValues metrics(const Matrix& x_true, const Matrix& x_est,
                            std::optional<double> max_value = std::nullopt) {
  if (x_true.rows() != x_est.rows() || x_true.cols() != x_est.cols()) {
    throw Error(ErrorCode::size_mismatch, "metric inputs differ in shape");
  }
  if (x_true.size() == 0) throw Error(ErrorCode::invalid_size, "empty metric input");
  const double max = max_value ? *max_value : x_true.cwiseAbs().maxCoeff();
  if (!(max > 0.0)) throw Error(ErrorCode::domain, "MAX must be positive");

  const double count = static_cast<double>(x_true.size());
  MetricValues out;
  out.mse = (x_true - x_est).squaredNorm() / count;
  out.psnr = out.mse == 0.0 ? std::numeric_limits<double>::infinity()
                            : 10.0 * std::log10(max * max / out.mse);

  const double mu_x = x_true.mean();
  const double mu_y = x_est.mean();
  const Matrix dx = x_true.array() - mu_x;
  const Matrix dy = x_est.array() - mu_y;
  const double var_x = dx.squaredNorm() / count;
  const double var_y = dy.squaredNorm() / count;
  const double cov = dx.cwiseProduct(dy).sum() / count;
  const double c1 = (0.01 * max) * (0.01 * max);
  const double c2 = (0.03 * max) * (0.03 * max);
  out.ssim = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) /
             ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
  return out;
}

/// Round-trippable decimal form; infinities become "inf" / "-inf".
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

}  // namespace gcfrft
