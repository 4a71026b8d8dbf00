#pragma once

// Separable application of the four transform families to time-vertex
// signals. A transform with row operator R and column operator C maps
// X -> R X C^T, which is (C (x) R) vec(X) for column-major vec; the
// (n1 n2) x (n1 n2) Kronecker matrix is never formed.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcfrft/coupling.hpp"
#include "gcfrft/error.hpp"
#include "gcfrft/fractional.hpp"
#include "gcfrft/graph.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

/// n1 x n2 signal: rows are vertices of the spatial graph, columns are
/// time (second factor) indices.
struct TimeVertexSignal {
  CMatrix data;
  bool real_flag = false;

  static TimeVertexSignal from_real(const Matrix& x) {
    if (!x.allFinite()) throw Error(ErrorCode::numeric_input, "signal has non-finite entries");
    return {x.cast<Complex>(), true};
  }
  static TimeVertexSignal from_complex(CMatrix x) {
    if (!all_finite(x)) throw Error(ErrorCode::numeric_input, "signal has non-finite entries");
    return {std::move(x), false};
  }

  Index rows() const noexcept { return data.rows(); }
  Index cols() const noexcept { return data.cols(); }
  Matrix real() const { return data.real(); }
};

enum class Family { gfrft2d, gbfrft2d, jfrft, gcgfrft };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::gfrft2d: return "gfrft2d";
    case Family::gbfrft2d: return "gbfrft2d";
    case Family::jfrft: return "jfrft";
    case Family::gcgfrft: return "gcgfrft";
  }
  return "unknown";
}

inline Family parse_family(const std::string& name) {
  if (name == "gfrft2d") return Family::gfrft2d;
  if (name == "gbfrft2d") return Family::gbfrft2d;
  if (name == "jfrft") return Family::jfrft;
  if (name == "gcgfrft") return Family::gcgfrft;
  throw Error(ErrorCode::config, "unknown transform family '" + name + "'");
}

/// Orders are always (spatial, temporal). In the JFRFT literature the graph
/// order is usually called beta and the DFRFT order alpha; here the spatial
/// order is the graph order and the temporal order is the DFRFT order.
struct Orders {
  double spatial = 0.0;
  double temporal = 0.0;
};

struct ContextOptions {
  DfrftMode dfrft_mode = DfrftMode::candan;
  double margin_tol = kDefaultMarginTolerance;
};

/// Cached spectral state for one spatial graph and one temporal axis: the
/// order-1 GFT operators with their eigenphase decompositions and the DFRFT
/// eigenbasis. Immutable; safe to share across threads.
class TransformContext {
 public:
  TransformContext(const SpectralBasis& spatial, std::optional<SpectralBasis> temporal,
                   Index n2, ContextOptions options = {})
      : spatial_gft_(gft_matrix(spatial)), n2_(n2), options_(options) {
    if (temporal) {
      if (temporal->size() != n2) {
        throw Error(ErrorCode::size_mismatch, "temporal basis size differs from n2");
      }
      temporal_gft_.emplace(gft_matrix(*temporal));
    }
    if (n2 >= 2) dfrft_.emplace(dfrft_matrix(n2, 1.0, options.dfrft_mode));
  }

  static TransformContext from_graphs(const Graph& spatial, const Graph& temporal,
                                      ContextOptions options = {}) {
    return TransformContext(eigendecompose(spatial), eigendecompose(temporal), temporal.size(),
                            options);
  }

  Index n1() const noexcept { return spatial_gft_.size(); }
  Index n2() const noexcept { return n2_; }
  const ContextOptions& options() const noexcept { return options_; }
  bool has_temporal_graph() const noexcept { return temporal_gft_.has_value(); }

  const FractionalOperator& spatial_gft() const noexcept { return spatial_gft_; }
  const FractionalOperator& temporal_gft() const {
    if (!temporal_gft_) throw Error(ErrorCode::config, "no temporal graph in this context");
    return *temporal_gft_;
  }
  const FractionalOperator& dfrft() const {
    if (!dfrft_) throw Error(ErrorCode::invalid_size, "DFRFT needs n2 >= 2");
    return *dfrft_;
  }

  FractionalOperator spatial(double order) const { return spatial_gft_.with_order(order); }
  FractionalOperator temporal_graph(double order) const {
    return temporal_gft().with_order(order);
  }
  FractionalOperator temporal_dfrft(double order) const { return dfrft().with_order(order); }

  CouplingDecomposition coupling(double beta) const {
    return phase_decompose(coupling_operator(temporal_graph(beta), temporal_dfrft(beta)),
                           options_.margin_tol);
  }
  CouplingDecomposition swapped_coupling(double beta) const {
    return phase_decompose(coupling_operator(temporal_dfrft(beta), temporal_graph(beta)),
                           options_.margin_tol);
  }
  FractionalOperator geodesic(double beta, double lambda) const {
    return geodesic_temporal_basis(temporal_graph(beta), coupling(beta), lambda);
  }

 private:
  FractionalOperator spatial_gft_;
  std::optional<FractionalOperator> temporal_gft_;
  std::optional<FractionalOperator> dfrft_;
  Index n2_;
  ContextOptions options_;
};

struct TransformPlan {
  FractionalOperator row_op;
  FractionalOperator col_op;
  Family family;
  Orders orders;
  std::optional<double> lambda;

  Index n1() const noexcept { return row_op.size(); }
  Index n2() const noexcept { return col_op.size(); }
};

inline TransformPlan make_plan(const TransformContext& ctx, Family family, Orders orders,
                               std::optional<double> lambda = std::nullopt) {
  if (family == Family::gcgfrft && !lambda) {
    throw Error(ErrorCode::config, "gcgfrft plan needs a coupling parameter lambda");
  }
  if (family != Family::gcgfrft && lambda) {
    throw Error(ErrorCode::config,
                std::string(to_string(family)) + " plan takes no coupling parameter");
  }
  switch (family) {
    case Family::gfrft2d:
      if (orders.spatial != orders.temporal) {
        throw Error(ErrorCode::config, "gfrft2d uses one shared order for both factors");
      }
      return {ctx.spatial(orders.spatial), ctx.temporal_graph(orders.temporal), family, orders,
              lambda};
    case Family::gbfrft2d:
      return {ctx.spatial(orders.spatial), ctx.temporal_graph(orders.temporal), family, orders,
              lambda};
    case Family::jfrft:
      return {ctx.spatial(orders.spatial), ctx.temporal_dfrft(orders.temporal), family, orders,
              lambda};
    case Family::gcgfrft:
      return {ctx.spatial(orders.spatial), ctx.geodesic(orders.temporal, *lambda), family,
              orders, lambda};
  }
  throw Error(ErrorCode::config, "unknown family");
}

/// Order list form used by the file/CLI layer: gfrft2d takes one shared
/// order, every other family takes (spatial, temporal).
inline TransformPlan make_plan(const TransformContext& ctx, Family family,
                               const std::vector<double>& orders,
                               std::optional<double> lambda = std::nullopt) {
  const size_t expected = family == Family::gfrft2d ? 1 : 2;
  if (orders.size() != expected) {
    throw Error(ErrorCode::config, std::string(to_string(family)) + " expects " +
                                       std::to_string(expected) + " order(s), got " +
                                       std::to_string(orders.size()));
  }
  const Orders o = expected == 1 ? Orders{orders[0], orders[0]} : Orders{orders[0], orders[1]};
  return make_plan(ctx, family, o, lambda);
}

namespace detail {
inline void check_shape(const TransformPlan& plan, const CMatrix& x) {
  if (x.rows() != plan.n1() || x.cols() != plan.n2()) {
    throw Error(ErrorCode::size_mismatch,
                "signal is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                    ", plan expects " + std::to_string(plan.n1()) + "x" +
                    std::to_string(plan.n2()));
  }
}
}  // namespace detail

/// X_hat = R X C^T.
inline TimeVertexSignal forward(const TransformPlan& plan, const TimeVertexSignal& x) {
  detail::check_shape(plan, x.data);
  return {plan.row_op.matrix() * x.data * plan.col_op.matrix().transpose(), false};
}

/// X = R^H X_hat conj(C).
inline TimeVertexSignal inverse(const TransformPlan& plan, const TimeVertexSignal& x_hat) {
  detail::check_shape(plan, x_hat.data);
  return {plan.row_op.matrix().adjoint() * x_hat.data * plan.col_op.matrix().conjugate(), false};
}

/// Column-major vec.
inline CVector vec(const CMatrix& x) { return x.reshaped(); }

inline CMatrix kronecker(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Summary of D = M^H M - I sufficient for Kronecker unitarity errors.
struct GramDefect {
  Index n = 0;
  double squared_norm = 0.0;
  double trace = 0.0;
};

inline GramDefect gram_defect(const CMatrix& m) {
  const CMatrix d = m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols());
  return {m.cols(), d.squaredNorm(), d.trace().real()};
}

/// ||(C (x) R)^H (C (x) R) - I||_F evaluated from the factors alone.
inline double kronecker_unitarity_error(const GramDefect& c, const GramDefect& r) {
  const double total = static_cast<double>(r.n) * c.squared_norm +
                       static_cast<double>(c.n) * r.squared_norm +
                       c.squared_norm * r.squared_norm + 2.0 * c.trace * r.trace +
                       2.0 * c.squared_norm * r.trace + 2.0 * c.trace * r.squared_norm;
  return std::sqrt(std::max(total, 0.0));
}

inline double kronecker_unitarity_error(const CMatrix& col, const CMatrix& row) {
  return kronecker_unitarity_error(gram_defect(col), gram_defect(row));
}

}  // namespace gcfrft
