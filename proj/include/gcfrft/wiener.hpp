#pragma once

// Learnable Wiener-type filtering in fractional spectral domains.
//
// The estimate is X_est = T^{-1}(h o T(Y)) for a separable unitary transform
// T with orders (alpha, beta) and, for the coupled family, a fixed lambda.
// Because T is unitary the loss ||X_est - X||_F^2 equals ||h o Y_hat -
// X_hat||_F^2 in the spectral domain, which is what the trainer evaluates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcfrft/coupling.hpp"
#include "gcfrft/derivatives.hpp"
#include "gcfrft/error.hpp"
#include "gcfrft/parallel.hpp"
#include "gcfrft/transforms.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

/// Learnable state plus the fixed coupling parameter. h is stored in the
/// n1 x n2 spectral layout and multiplies the spectrum element-wise.
struct FilterParams {
  double alpha = 0.5;
  double beta = 0.5;
  Matrix h;
  double lambda = 0.0;
};

enum class Optimizer { gd, adam };
enum class GradMode { fd, analytic };

struct TrainConfig {
  double lr_orders = 0.1;
  double lr_filter = 0.1;
  int epochs = 200;
  Optimizer optimizer = Optimizer::gd;
  double fd_step = 1e-4;
  GradMode grad_mode = GradMode::fd;
  std::uint64_t seed = 0;
  double init_order = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  static TrainConfig adam_defaults() {
    TrainConfig c;
    c.optimizer = Optimizer::adam;
    c.lr_orders = 2e-2;
    c.lr_filter = 2e-2;
    c.epochs = 100;
    return c;
  }

  void validate() const {
    if (!(lr_orders >= 0.0) || !(lr_filter >= 0.0)) {
      throw Error(ErrorCode::config, "learning rates must be non-negative");
    }
    if (epochs < 1) throw Error(ErrorCode::config, "epochs must be >= 1");
    if (!(fd_step > 0.0)) throw Error(ErrorCode::config, "fd_step must be positive");
    if (!std::isfinite(init_order)) throw Error(ErrorCode::config, "init_order must be finite");
  }
};

/// Y = G_S X G_T (+ noise, added by observe()).
struct DegradationModel {
  CMatrix g_s;
  CMatrix g_t;

  static DegradationModel identity(Index n1, Index n2) {
    return {CMatrix::Identity(n1, n1), CMatrix::Identity(n2, n2)};
  }
};

inline TimeVertexSignal observe(const TimeVertexSignal& x, const DegradationModel& d,
                                const TimeVertexSignal& noise) {
  if (d.g_s.rows() != x.rows() || d.g_s.cols() != x.rows() || d.g_t.rows() != x.cols() ||
      d.g_t.cols() != x.cols() || noise.rows() != x.rows() || noise.cols() != x.cols()) {
    throw Error(ErrorCode::size_mismatch, "degradation operators or noise do not match signal");
  }
  return {d.g_s * x.data * d.g_t + noise.data, x.real_flag && noise.real_flag};
}

/// Binds a transform family to a context and maps FilterParams onto plans.
/// gfrft2d has a single shared order: alpha drives both factors and beta is
/// kept equal to it.
class WienerModel {
 public:
  WienerModel(const TransformContext& ctx, Family family) : ctx_(&ctx), family_(family) {}

  const TransformContext& context() const noexcept { return *ctx_; }
  Family family() const noexcept { return family_; }

  Orders orders(const FilterParams& p) const {
    return family_ == Family::gfrft2d ? Orders{p.alpha, p.alpha} : Orders{p.alpha, p.beta};
  }
  std::optional<double> lambda(const FilterParams& p) const {
    return family_ == Family::gcgfrft ? std::optional<double>(p.lambda) : std::nullopt;
  }
  TransformPlan plan(const FilterParams& p) const {
    return make_plan(*ctx_, family_, orders(p), lambda(p));
  }

 private:
  const TransformContext* ctx_;
  Family family_;
};

namespace detail {
inline void check_pair(const WienerModel& model, const CMatrix& y, const CMatrix* x,
                       const Matrix* h) {
  const Index n1 = model.context().n1();
  const Index n2 = model.context().n2();
  if (y.rows() != n1 || y.cols() != n2 || (x && (x->rows() != n1 || x->cols() != n2)) ||
      (h && (h->rows() != n1 || h->cols() != n2))) {
    throw Error(ErrorCode::size_mismatch, "signal or filter shape does not match the context (" +
                                              std::to_string(n1) + "x" + std::to_string(n2) +
                                              ")");
  }
}

inline double real_inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}
}  // namespace detail

struct DenoiseResult {
  // Real part when the observation was real, the complex estimate otherwise.
  TimeVertexSignal estimate;
  CMatrix complex_estimate;
};

inline DenoiseResult denoise(const TimeVertexSignal& y, const FilterParams& params,
                             const WienerModel& model) {
  detail::check_pair(model, y.data, nullptr, &params.h);
  const TransformPlan plan = model.plan(params);
  TimeVertexSignal spec = forward(plan, y);
  spec.data = spec.data.cwiseProduct(params.h.cast<Complex>());
  CMatrix est = inverse(plan, spec).data;
  TimeVertexSignal out{y.real_flag ? CMatrix(est.real().cast<Complex>()) : est, y.real_flag};
  return {std::move(out), std::move(est)};
}

/// ||denoise(y)_complex - x_true||_F^2.
inline double loss(const TimeVertexSignal& y, const TimeVertexSignal& x_true,
                   const FilterParams& params, const WienerModel& model) {
  detail::check_pair(model, y.data, &x_true.data, &params.h);
  return (denoise(y, params, model).complex_estimate - x_true.data).squaredNorm();
}

/// d loss / d h = 2 Re((h o Y_hat - X_hat) o conj(Y_hat)).
inline Matrix grad_h(const TimeVertexSignal& y, const TimeVertexSignal& x_true,
                     const FilterParams& params, const WienerModel& model) {
  detail::check_pair(model, y.data, &x_true.data, &params.h);
  const TransformPlan plan = model.plan(params);
  const CMatrix yh = forward(plan, y).data;
  const CMatrix xh = forward(plan, x_true).data;
  const CMatrix r = params.h.cast<Complex>().cwiseProduct(yh) - xh;
  return 2.0 * r.cwiseProduct(yh.conjugate()).real();
}

/// Per-bin minimizer of the convex h-subproblem, restricted to real h.
/// Bins with |Y_hat|^2 below 1e-14 of the mean spectral power get h = 0.
inline Matrix closed_form_h(const TimeVertexSignal& y, const TimeVertexSignal& x_true,
                            const FilterParams& params, const WienerModel& model) {
  detail::check_pair(model, y.data, &x_true.data, nullptr);
  FilterParams p = params;
  p.h = Matrix::Ones(y.rows(), y.cols());
  const TransformPlan plan = model.plan(p);
  const CMatrix yh = forward(plan, y).data;
  const CMatrix xh = forward(plan, x_true).data;
  const double floor =
      1e-14 * yh.squaredNorm() / static_cast<double>(yh.rows() * yh.cols());
  Matrix h = Matrix::Zero(yh.rows(), yh.cols());
  for (Index i = 0; i < yh.rows(); ++i) {
    for (Index j = 0; j < yh.cols(); ++j) {
      const double power = std::norm(yh(i, j));
      if (power > floor && power > 0.0) h(i, j) = std::real(xh(i, j) * std::conj(yh(i, j))) / power;
    }
  }
  return h;
}

struct OrderGradient {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Spectral-domain objective for one (Y, X) pair. Projections onto the
/// spatial eigenbasis are computed once; each evaluation costs one
/// n1 x n1 by n1 x 2n2 product plus n2 x n2 work for the temporal operator.
/// Holds a one-entry coupling cache keyed on beta, so it is not meant to be
/// shared between threads.
class SpectralObjective {
 public:
  struct Evaluation {
    double loss = 0.0;
    CMatrix y_row;  // F_G1^alpha Y
    CMatrix x_row;  // F_G1^alpha X
    CMatrix y_hat;
    CMatrix x_hat;
    CMatrix residual;  // h o Y_hat - X_hat
    FractionalOperator col;
  };

  SpectralObjective(const WienerModel& model, const CMatrix& y, const CMatrix& x)
      : model_(model),
        spatial_(model.context().spatial_gft().decomposition()) {
    detail::check_pair(model, y, &x, nullptr);
    const Index n2 = y.cols();
    projected_.resize(y.rows(), 2 * n2);
    projected_.leftCols(n2) = spatial_->basis.adjoint() * y;
    projected_.rightCols(n2) = spatial_->basis.adjoint() * x;
  }

  const WienerModel& model() const noexcept { return model_; }

  FractionalOperator temporal(double alpha, double beta, double lambda) const {
    const TransformContext& ctx = model_.context();
    switch (model_.family()) {
      case Family::gfrft2d: return ctx.temporal_graph(alpha);
      case Family::gbfrft2d: return ctx.temporal_graph(beta);
      case Family::jfrft: return ctx.temporal_dfrft(beta);
      case Family::gcgfrft:
        return geodesic_temporal_basis(ctx.temporal_graph(beta), coupling(beta), lambda);
    }
    throw Error(ErrorCode::config, "unknown family");
  }

  Evaluation evaluate(const FilterParams& p) const {
    const Index n2 = projected_.cols() / 2;
    const CVector phase = spatial_->phase_factors(p.alpha);
    const CMatrix rows = spatial_->basis * (phase.asDiagonal() * projected_);
    FractionalOperator col = temporal(p.alpha, p.beta, p.lambda);
    const CMatrix col_t = col.matrix().transpose();
    Evaluation e{0.0, rows.leftCols(n2), rows.rightCols(n2), {}, {}, {}, std::move(col)};
    e.y_hat = e.y_row * col_t;
    e.x_hat = e.x_row * col_t;
    e.residual = p.h.cast<Complex>().cwiseProduct(e.y_hat) - e.x_hat;
    e.loss = e.residual.squaredNorm();
    return e;
  }

  double loss(const FilterParams& p) const { return evaluate(p).loss; }

  static Matrix filter_gradient(const Evaluation& e) {
    return 2.0 * e.residual.cwiseProduct(e.y_hat.conjugate()).real();
  }

  /// Central differences with step `step`; the step is halved (up to four
  /// times) if a perturbed beta breaks the principal-log assumption.
  OrderGradient gradient_fd(const FilterParams& p, double step) const {
    for (int attempt = 0;; ++attempt) {
      try {
        return central_difference(p, step);
      } catch (const AssumptionViolated&) {
        if (attempt >= 4) throw;
        step *= 0.5;
      }
    }
  }

  OrderGradient gradient_analytic(const FilterParams& p) const {
    return gradient_analytic(p, evaluate(p));
  }

  OrderGradient gradient_analytic(const FilterParams& p, const Evaluation& e) const {
    const Index n2 = projected_.cols() / 2;
    const CMatrix hc = p.h.cast<Complex>();
    const CMatrix col_t = e.col.matrix().transpose();

    CVector dphase = spatial_->phase_factors(p.alpha);
    for (Index k = 0; k < dphase.size(); ++k) dphase(k) *= kJ * spatial_->phases(k);
    const CMatrix drows = spatial_->basis * (dphase.asDiagonal() * projected_);
    const CMatrix dy_a = drows.leftCols(n2) * col_t;
    const CMatrix dx_a = drows.rightCols(n2) * col_t;
    const double d_spatial =
        2.0 * detail::real_inner(e.residual, hc.cwiseProduct(dy_a) - dx_a);

    const CMatrix dcol_t = temporal_derivative(p).transpose();
    const CMatrix dy_b = e.y_row * dcol_t;
    const CMatrix dx_b = e.x_row * dcol_t;
    const double d_temporal =
        2.0 * detail::real_inner(e.residual, hc.cwiseProduct(dy_b) - dx_b);

    if (model_.family() == Family::gfrft2d) {
      const double shared = d_spatial + d_temporal;
      return {shared, shared};
    }
    return {d_spatial, d_temporal};
  }

 private:
  CouplingDecomposition coupling(double beta) const {
    if (!cached_beta_ || *cached_beta_ != beta) {
      cached_coupling_ = model_.context().coupling(beta);
      cached_beta_ = beta;
    }
    return *cached_coupling_;
  }

  CMatrix temporal_derivative(const FilterParams& p) const {
    const TransformContext& ctx = model_.context();
    switch (model_.family()) {
      case Family::gfrft2d: return ctx.temporal_graph(p.alpha).derivative();
      case Family::gbfrft2d: return ctx.temporal_graph(p.beta).derivative();
      case Family::jfrft: return ctx.temporal_dfrft(p.beta).derivative();
      case Family::gcgfrft:
        return geodesic_beta_derivative(ctx.temporal_graph(p.beta), ctx.temporal_dfrft(p.beta),
                                        coupling(p.beta), p.lambda);
    }
    throw Error(ErrorCode::config, "unknown family");
  }

  OrderGradient central_difference(const FilterParams& p, double step) const {
    auto shifted = [&](double da, double db) {
      FilterParams q = p;
      q.alpha += da;
      q.beta += db;
      return loss(q);
    };
    const double d_alpha = (shifted(step, 0.0) - shifted(-step, 0.0)) / (2.0 * step);
    if (model_.family() == Family::gfrft2d) return {d_alpha, d_alpha};
    const double d_beta = (shifted(0.0, step) - shifted(0.0, -step)) / (2.0 * step);
    return {d_alpha, d_beta};
  }

  const WienerModel& model_;
  std::shared_ptr<const PhaseDecomposition> spatial_;
  CMatrix projected_;  // [P^H Y, P^H X]
  mutable std::optional<double> cached_beta_;
  mutable std::optional<CouplingDecomposition> cached_coupling_;
};

/// (d loss/d alpha, d loss/d beta). For gfrft2d both entries hold the
/// derivative with respect to the shared order.
inline OrderGradient grad_orders(const TimeVertexSignal& y, const TimeVertexSignal& x_true,
                                 const FilterParams& params, const WienerModel& model,
                                 GradMode mode = GradMode::fd, double fd_step = 1e-4) {
  detail::check_pair(model, y.data, &x_true.data, &params.h);
  const SpectralObjective objective(model, y.data, x_true.data);
  return mode == GradMode::fd ? objective.gradient_fd(params, fd_step)
                              : objective.gradient_analytic(params);
}

struct TraceRow {
  int epoch = 0;
  double loss = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct TrainResult {
  FilterParams params;
  std::vector<TraceRow> trace;  // loss at the start of each epoch
  double final_loss = 0.0;      // loss at the returned parameters
};

/// Gradient training of (alpha, beta, h) at fixed lambda. Orders start at
/// config.init_order and h at all-ones. Steps are taken on the mean squared
/// residual loss / (n1 n2); the trace reports the summed loss.
inline TrainResult train(const TimeVertexSignal& y, const TimeVertexSignal& x_true, double lambda,
                         const TrainConfig& config, const WienerModel& model) {
  config.validate();
  if (model.family() == Family::gcgfrft) detail::check_lambda(lambda);
  const Index n1 = model.context().n1();
  const Index n2 = model.context().n2();
  const SpectralObjective objective(model, y.data, x_true.data);

  FilterParams p;
  p.alpha = config.init_order;
  p.beta = config.init_order;
  p.h = Matrix::Ones(n1, n2);
  p.lambda = lambda;
  const double scale = 1.0 / static_cast<double>(n1 * n2);

  // Adam moments
  double m_a = 0, v_a = 0, m_b = 0, v_b = 0;
  Matrix m_h = Matrix::Zero(n1, n2), v_h = Matrix::Zero(n1, n2);
  auto adam = [&](double g, double& m, double& v, int t) {
    m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g;
    v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(config.adam_beta1, t));
    const double vhat = v / (1.0 - std::pow(config.adam_beta2, t));
    return mhat / (std::sqrt(vhat) + config.adam_eps);
  };

  TrainResult result;
  result.trace.reserve(static_cast<size_t>(config.epochs));
  int epoch = 0;
  try {
    for (; epoch < config.epochs; ++epoch) {
      const auto e = objective.evaluate(p);
      result.trace.push_back({epoch, e.loss, p.alpha, p.beta});

      const Matrix g_h = SpectralObjective::filter_gradient(e) * scale;
      OrderGradient g = config.grad_mode == GradMode::fd
                            ? objective.gradient_fd(p, config.fd_step)
                            : objective.gradient_analytic(p, e);
      g.alpha *= scale;
      g.beta *= scale;

      if (config.optimizer == Optimizer::gd) {
        p.alpha -= config.lr_orders * g.alpha;
        p.beta -= config.lr_orders * g.beta;
        p.h -= config.lr_filter * g_h;
      } else {
        const int t = epoch + 1;
        p.alpha -= config.lr_orders * adam(g.alpha, m_a, v_a, t);
        p.beta -= config.lr_orders * adam(g.beta, m_b, v_b, t);
        for (Index i = 0; i < n1; ++i) {
          for (Index j = 0; j < n2; ++j) {
            p.h(i, j) -= config.lr_filter * adam(g_h(i, j), m_h(i, j), v_h(i, j), t);
          }
        }
      }
      if (model.family() == Family::gfrft2d) p.beta = p.alpha;
    }
    result.final_loss = objective.loss(p);
  } catch (const AssumptionViolated& ex) {
    throw AssumptionViolated("epoch " + std::to_string(epoch) + ", beta=" +
                                 std::to_string(p.beta) + ": " + ex.what(),
                             ex.margin(), ex.index());
  }
  result.params = std::move(p);
  return result;
}

struct GridRow {
  double lambda = 0.0;
  bool ok = false;
  double score = std::numeric_limits<double>::infinity();
  std::optional<TrainResult> result;
  std::string error;
};

struct GridSearchResult {
  double best_lambda = 0.0;
  TrainResult best;
  std::vector<GridRow> table;
};

/// Scores a finished run; lower is better. Defaults to the final loss.
using GridScore = std::function<double(const TrainResult&)>;

/// Trains independently at every grid lambda and keeps the lowest score
/// (ties go to the smaller lambda). Grid points that violate the
/// principal-log assumption are recorded and skipped.
inline GridSearchResult lambda_grid_search(const TimeVertexSignal& y,
                                           const TimeVertexSignal& x_true,
                                           const std::vector<double>& grid,
                                           const TrainConfig& config, const WienerModel& model,
                                           GridScore score = {}, unsigned threads = 1) {
  if (grid.empty()) throw Error(ErrorCode::config, "lambda grid is empty");
  for (double l : grid) detail::check_lambda(l);
  config.validate();
  if (!score) score = [](const TrainResult& r) { return r.final_loss; };

  GridSearchResult out;
  out.table.resize(grid.size());
  parallel_for(grid.size(), threads, [&](size_t i) {
    GridRow& row = out.table[i];
    row.lambda = grid[i];
    try {
      row.result = train(y, x_true, grid[i], config, model);
      row.score = score(*row.result);
      row.ok = true;
    } catch (const AssumptionViolated& ex) {
      row.error = ex.what();
    }
  });

  const GridRow* best = nullptr;
  for (const GridRow& row : out.table) {
    if (!row.ok) continue;
    if (!best || row.score < best->score ||
        (row.score == best->score && row.lambda < best->lambda)) {
      best = &row;
    }
  }
  if (!best) {
    std::string detail = "every lambda on the grid violates the principal-log assumption";
    if (!out.table.empty()) detail += " (first: " + out.table.front().error + ")";
    throw AssumptionViolated(detail, 0.0, -1);
  }
  out.best_lambda = best->lambda;
  out.best = *best->result;
  return out;
}

}  // namespace gcfrft
