#pragma once

// Weighted undirected graphs and their Cartesian products.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gcfrft/error.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

/// Weighted undirected graph stored as a dense symmetric adjacency matrix.
///
/// The constructor symmetrizes its input as (A + A^T) / 2, so the stored
/// adjacency is exactly symmetric. Self-loops, negative weights and
/// non-finite entries are rejected.
class Graph {
 public:
  explicit Graph(Matrix adjacency, std::string label = {}) : label_(std::move(label)) {
    if (adjacency.rows() != adjacency.cols() || adjacency.rows() < 1) {
      throw Error(ErrorCode::invalid_size, "adjacency must be a non-empty square matrix");
    }
    if (!adjacency.allFinite()) {
      throw Error(ErrorCode::numeric_input, "adjacency has non-finite entries");
    }
    const Index n = adjacency.rows();
    adjacency_ = Matrix(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        adjacency_(i, j) = 0.5 * (adjacency(i, j) + adjacency(j, i));
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (adjacency_(i, i) != 0.0) {
        throw Error(ErrorCode::invalid_graph,
                    "self-loop at node " + std::to_string(i));
      }
    }
    if ((adjacency_.array() < 0.0).any()) {
      throw Error(ErrorCode::invalid_graph, "negative edge weight");
    }
  }

  Index size() const noexcept { return adjacency_.rows(); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  const std::string& label() const noexcept { return label_; }

  Index edge_count() const {
    Index count = 0;
    for (Index i = 0; i < size(); ++i) {
      for (Index j = i + 1; j < size(); ++j) {
        if (adjacency_(i, j) != 0.0) ++count;
      }
    }
    return count;
  }

 private:
  Matrix adjacency_;
  std::string label_;
};

/// Unit-weight path 0 - 1 - ... - (n-1).
inline Graph path_graph(Index n) {
  if (n < 2) {
    throw Error(ErrorCode::invalid_size, "path graph needs n >= 2, got " + std::to_string(n));
  }
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = 1.0;
    a(i + 1, i) = 1.0;
  }
  return Graph(std::move(a), "path(" + std::to_string(n) + ")");
}

struct UnitWeights {};
struct GaussianWeights {
  double sigma = 1.0;
};
using WeightMode = std::variant<UnitWeights, GaussianWeights>;

/// k-nearest-neighbour graph over the rows of `points`.
///
/// Each node selects its k closest other nodes (ties go to the lower
/// index); the directed relation is symmetrized by union.
inline Graph knn_graph(const Matrix& points, Index k, WeightMode weights = UnitWeights{}) {
  const Index n = points.rows();
  if (k < 1 || k >= n) {
    throw Error(ErrorCode::invalid_k, "k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                                          ", n=" + std::to_string(n) + ")");
  }
  if (!points.allFinite()) {
    throw Error(ErrorCode::numeric_input, "point coordinates must be finite");
  }
  Matrix dist2(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      dist2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (dist2(i, j) == 0.0) {
        throw Error(ErrorCode::ambiguous_distance,
                    "duplicate points " + std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
  if (const auto* g = std::get_if<GaussianWeights>(&weights); g && !(g->sigma > 0.0)) {
    throw Error(ErrorCode::config, "gaussian weight sigma must be positive");
  }

  Matrix a = Matrix::Zero(n, n);
  std::vector<Index> order(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) {
      return dist2(i, l) < dist2(i, r);
    });
    Index taken = 0;
    for (Index j : order) {
      if (j == i) continue;
      if (taken == k) break;
      double w = 1.0;
      if (const auto* g = std::get_if<GaussianWeights>(&weights)) {
        w = std::exp(-dist2(i, j) / (2.0 * g->sigma * g->sigma));
      }
      a(i, j) = w;
      a(j, i) = w;
      ++taken;
    }
  }
  return Graph(std::move(a), "knn(k=" + std::to_string(k) + ")");
}

/// Cartesian product G1 [] G2. Vertices are ordered lexicographically,
/// (0,0), (0,1), ..., so vertex (i1, i2) has index i1 * n2 + i2.
class ProductGraph {
 public:
  static constexpr Index kDefaultMaterializeCap = 4096;

  ProductGraph(Graph g1, Graph g2) : g1_(std::move(g1)), g2_(std::move(g2)) {}

  const Graph& factor1() const noexcept { return g1_; }
  const Graph& factor2() const noexcept { return g2_; }
  Index size() const noexcept { return g1_.size() * g2_.size(); }

  /// Kronecker sum A1 (+) A2 = A1 (x) I + I (x) A2. Only for validation at
  /// small sizes; transforms never need it.
  Matrix adjacency(Index cap = kDefaultMaterializeCap) const {
    const Index n1 = g1_.size();
    const Index n2 = g2_.size();
    if (n1 * n2 > cap) {
      throw Error(ErrorCode::invalid_size, "product graph with " + std::to_string(n1 * n2) +
                                               " nodes exceeds materialization cap " +
                                               std::to_string(cap));
    }
    Matrix a = Matrix::Zero(n1 * n2, n1 * n2);
    const Matrix& a1 = g1_.adjacency();
    const Matrix& a2 = g2_.adjacency();
    for (Index i1 = 0; i1 < n1; ++i1) {
      for (Index j1 = 0; j1 < n1; ++j1) {
        for (Index i2 = 0; i2 < n2; ++i2) {
          a(i1 * n2 + i2, j1 * n2 + i2) += a1(i1, j1);
        }
      }
      for (Index i2 = 0; i2 < n2; ++i2) {
        for (Index j2 = 0; j2 < n2; ++j2) {
          a(i1 * n2 + i2, i1 * n2 + j2) += a2(i2, j2);
        }
      }
    }
    return a;
  }

 private:
  Graph g1_;
  Graph g2_;
};

inline ProductGraph cartesian_product(Graph g1, Graph g2) {
  return ProductGraph(std::move(g1), std::move(g2));
}

}  // namespace gcfrft
