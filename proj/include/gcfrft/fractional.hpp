#pragma once

// Graph-induced and discrete fractional Fourier operators.
//
// Every operator here is a fractional power of a unitary matrix U taken
// through its eigenphases: U = P diag(e^{j theta}) P^H gives
// U^a = P diag(e^{j a theta}) P^H. The decomposition (P, theta) is computed
// once and shared by every order derived from it, so changing the order only
// touches the diagonal phase factors.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gcfrft/error.hpp"
#include "gcfrft/graph.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

namespace tol {
// Unitarity accepted on inputs, per unit of dimension.
inline constexpr double kUnitaryInput = 1e-8;
// Unitarity guaranteed on outputs, per unit of dimension.
inline constexpr double kUnitaryOutput = 1e-9;
// Reconstruction (alpha = 1, cached decomposition), per unit of dimension.
inline constexpr double kReconstruction = 1e-8;
// Phases this close to -pi are moved onto the +pi side of the branch cut.
inline constexpr double kBranchSnap = 1e-8;
}  // namespace tol

/// Real symmetric eigendecomposition A = V diag(lambda) V^T with eigenvalues
/// in descending order and each eigenvector's largest-magnitude entry positive.
struct SpectralBasis {
  Matrix v;
  Vector lambda;
  std::string source;

  Index size() const noexcept { return v.rows(); }
};

namespace detail {

// Largest-magnitude component positive; ties go to the lower index.
inline void fix_signs(Matrix& v) {
  for (Index k = 0; k < v.cols(); ++k) {
    Index best = 0;
    for (Index i = 1; i < v.rows(); ++i) {
      if (std::abs(v(i, k)) > std::abs(v(best, k))) best = i;
    }
    if (v(best, k) < 0.0) v.col(k) = -v.col(k);
  }
}

// Indices that sort `keys` descending, stable on ties.
inline std::vector<Index> descending_order(const Vector& keys) {
  std::vector<Index> order(static_cast<size_t>(keys.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return keys(a) > keys(b); });
  return order;
}

inline void check_square(const auto& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorCode::size_mismatch, std::string(what) + " must be a non-empty square matrix");
  }
}

}  // namespace detail

inline SpectralBasis eigendecompose_symmetric(const Matrix& a, std::string source = {}) {
  detail::check_square(a, "symmetric operator");
  if (!a.allFinite()) {
    throw Error(ErrorCode::numeric_input, "operator has non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::decomposition, "symmetric eigensolver did not converge");
  }
  const auto order = detail::descending_order(solver.eigenvalues());
  SpectralBasis basis;
  basis.v.resize(a.rows(), a.cols());
  basis.lambda.resize(a.rows());
  for (Index k = 0; k < a.rows(); ++k) {
    basis.v.col(k) = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
    basis.lambda(k) = solver.eigenvalues()(order[static_cast<size_t>(k)]);
  }
  detail::fix_signs(basis.v);
  basis.source = std::move(source);
  return basis;
}

inline SpectralBasis eigendecompose(const Graph& g) {
  return eigendecompose_symmetric(g.adjacency(), g.label());
}

/// Eigenphase factorization U = basis * diag(e^{j phases}) * basis^H of a
/// unitary matrix, with phases sorted descending.
struct PhaseDecomposition {
  CMatrix basis;
  Vector phases;

  Index size() const noexcept { return basis.rows(); }

  CVector phase_factors(double order) const {
    CVector d(phases.size());
    for (Index k = 0; k < phases.size(); ++k) d(k) = std::exp(kJ * (order * phases(k)));
    return d;
  }

  CMatrix power(double order) const {
    if (order == 0.0) return CMatrix::Identity(size(), size());
    return basis * phase_factors(order).asDiagonal() * basis.adjoint();
  }

  /// d/d(order) of power(order).
  CMatrix power_derivative(double order) const {
    CVector d = phase_factors(order);
    for (Index k = 0; k < phases.size(); ++k) d(k) *= kJ * phases(k);
    return basis * d.asDiagonal() * basis.adjoint();
  }
};

enum class BranchPolicy {
  // theta in (-pi, pi]; roundoff images of -1 are snapped to +pi.
  snap_to_pi,
  // Raw principal arguments, used where closeness to the cut must be visible.
  raw,
};

/// Eigenphase decomposition of a unitary matrix via the complex Schur form.
/// For a normal matrix the triangular factor is diagonal, so the Schur
/// vectors are an orthonormal eigenbasis even inside eigenvalue clusters.
inline PhaseDecomposition decompose_unitary(const CMatrix& u,
                                            BranchPolicy branch = BranchPolicy::snap_to_pi) {
  detail::check_square(u, "unitary input");
  const Index n = u.rows();
  if (!all_finite(u)) {
    throw Error(ErrorCode::numeric_input, "unitary input has non-finite entries");
  }
  const double err = unitarity_error(u);
  if (err > tol::kUnitaryInput * static_cast<double>(n)) {
    throw Error(ErrorCode::not_unitary,
                "||U^H U - I||_F = " + std::to_string(err) + " exceeds tolerance");
  }
  Eigen::ComplexSchur<CMatrix> schur(u, /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::decomposition, "complex Schur iteration did not converge");
  }
  const CMatrix& t = schur.matrixT();
  const double off = t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();
  if (off > tol::kReconstruction * static_cast<double>(n)) {
    throw Error(ErrorCode::decomposition,
                "Schur factor is not diagonal (off-diagonal norm " + std::to_string(off) + ")");
  }
  Vector raw(n);
  for (Index k = 0; k < n; ++k) {
    raw(k) = std::arg(t(k, k));
    if (branch == BranchPolicy::snap_to_pi && raw(k) <= -kPi + tol::kBranchSnap) raw(k) = kPi;
  }
  const auto order = detail::descending_order(raw);
  PhaseDecomposition out;
  out.basis.resize(n, n);
  out.phases.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<size_t>(k)];
    out.basis.col(k) = schur.matrixU().col(src);
    out.phases(k) = raw(src);
  }
  return out;
}

enum class OperatorKind { graph, dfrft, geodesic };

inline const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::graph: return "graph";
    case OperatorKind::dfrft: return "dfrft";
    case OperatorKind::geodesic: return "geodesic";
  }
  return "unknown";
}

/// A unitary matrix M = L * P diag(e^{j*order*theta}) P^H tagged with its
/// order and provenance. L (the left factor) is the identity except for the
/// geodesic temporal basis, where L = F_G2^beta and the order is lambda.
class FractionalOperator {
 public:
  FractionalOperator(std::shared_ptr<const PhaseDecomposition> decomposition, double order,
                     OperatorKind kind, std::optional<CMatrix> left = std::nullopt)
      : decomposition_(std::move(decomposition)),
        left_(std::move(left)),
        order_(order),
        kind_(kind) {
    matrix_ = decomposition_->power(order_);
    if (left_) matrix_ = (*left_) * matrix_;
  }

  /// Wraps an exactly known matrix (e.g. V^T) together with its cached
  /// decomposition at the given order.
  FractionalOperator(CMatrix matrix, std::shared_ptr<const PhaseDecomposition> decomposition,
                     double order, OperatorKind kind)
      : matrix_(std::move(matrix)),
        decomposition_(std::move(decomposition)),
        order_(order),
        kind_(kind) {}

  const CMatrix& matrix() const noexcept { return matrix_; }
  double order() const noexcept { return order_; }
  OperatorKind kind() const noexcept { return kind_; }
  Index size() const noexcept { return matrix_.rows(); }
  const Vector& phases() const noexcept { return decomposition_->phases; }
  const CMatrix& phase_basis() const noexcept { return decomposition_->basis; }
  const std::optional<CMatrix>& left_factor() const noexcept { return left_; }
  const std::shared_ptr<const PhaseDecomposition>& decomposition() const noexcept {
    return decomposition_;
  }

  /// Same family at another order; reuses the cached decomposition.
  FractionalOperator with_order(double order) const {
    if (kind_ == OperatorKind::geodesic && !(order >= 0.0 && order <= 1.0)) {
      throw Error(ErrorCode::domain, "coupling parameter must lie in [0, 1]");
    }
    return FractionalOperator(decomposition_, order, kind_, left_);
  }

  /// dM/d(order) at the current order.
  CMatrix derivative() const {
    CMatrix d = decomposition_->power_derivative(order_);
    if (left_) d = (*left_) * d;
    return d;
  }

  double unitarity_error() const { return gcfrft::unitarity_error(matrix_); }

  /// ||M - L P diag(e^{j order theta}) P^H||_F.
  double consistency_error() const {
    CMatrix rebuilt = decomposition_->power(order_);
    if (left_) rebuilt = (*left_) * rebuilt;
    return (matrix_ - rebuilt).norm();
  }

 private:
  CMatrix matrix_;
  std::shared_ptr<const PhaseDecomposition> decomposition_;
  std::optional<CMatrix> left_;
  double order_;
  OperatorKind kind_;
};

inline FractionalOperator unitary_fractional_power(const CMatrix& u, double order,
                                                   OperatorKind kind = OperatorKind::graph) {
  auto decomposition = std::make_shared<const PhaseDecomposition>(decompose_unitary(u));
  return FractionalOperator(std::move(decomposition), order, kind);
}

/// GFT matrix F_G = V^H (= V^T for a real basis), order 1.
inline FractionalOperator gft_matrix(const SpectralBasis& basis) {
  CMatrix f = basis.v.transpose().cast<Complex>();
  auto decomposition = std::make_shared<const PhaseDecomposition>(decompose_unitary(f));
  return FractionalOperator(std::move(f), std::move(decomposition), 1.0, OperatorKind::graph);
}

/// Graph fractional Fourier transform F_G^order.
inline FractionalOperator graph_frft(const SpectralBasis& basis, double order) {
  return gft_matrix(basis).with_order(order);
}

/// Unitary DFT, F[m][k] = e^{-j 2 pi m k / n} / sqrt(n).
inline CMatrix dft_matrix(Index n) {
  CMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index m = 0; m < n; ++m) {
    for (Index k = 0; k < n; ++k) {
      const auto mk = static_cast<double>((m * k) % n);
      f(m, k) = std::polar(scale, -2.0 * kPi * mk / static_cast<double>(n));
    }
  }
  return f;
}

enum class DfrftMode { candan, principal_shifted };

namespace detail {

// Hermite-Gauss-like eigenvectors of the DFT from the commuting matrix
// S = D2 + F D2 F^H, split into even and odd parts and interleaved
// (even_0, odd_0, even_1, odd_1, ...). Column k carries the DFT eigenvalue
// e^{-j pi/2 k_hat}, k_hat = k except the last, which is n for even n.
inline PhaseDecomposition candan_decomposition(Index n) {
  Matrix s = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    s(k, k) = 2.0 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n)) - 4.0;
    s(k, (k + 1) % n) += 1.0;
    s(k, (k + n - 1) % n) += 1.0;
  }
  const Index half = n / 2;
  const bool even = (n % 2 == 0);
  const double r = 1.0 / std::sqrt(2.0);
  Matrix p = Matrix::Zero(n, n);
  p(0, 0) = 1.0;
  for (Index i = 1; i <= half - (even ? 1 : 0); ++i) {
    p(i, i) = r;
    p(i, n - i) = r;
  }
  if (even) p(half, half) = 1.0;
  for (Index i = half + 1; i < n; ++i) {
    p(i, i) = -r;
    p(i, n - i) = r;
  }
  const Matrix cs = p * s * p.transpose();
  const Index n_even = half + 1;
  const Index n_odd = n - n_even;

  auto sorted_block = [&](Index offset, Index size) {
    Matrix vecs = Matrix::Zero(n, size);
    if (size == 0) return vecs;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cs.block(offset, offset, size, size));
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::construction, "DFRFT commuting-matrix eigensolver failed");
    }
    const auto order = descending_order(solver.eigenvalues());
    Matrix embedded = Matrix::Zero(n, size);
    for (Index k = 0; k < size; ++k) {
      embedded.block(offset, k, size, 1) = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
    }
    vecs = p.transpose() * embedded;
    fix_signs(vecs);
    return vecs;
  };
  const Matrix evens = sorted_block(0, n_even);
  const Matrix odds = sorted_block(n_even, n_odd);

  PhaseDecomposition out;
  out.basis.resize(n, n);
  out.phases.resize(n);
  Index ie = 0;
  Index io = 0;
  for (Index k = 0; k < n; ++k) {
    const bool take_even = (k % 2 == 0 && ie < n_even) || io >= n_odd;
    out.basis.col(k) = (take_even ? evens.col(ie++) : odds.col(io++)).cast<Complex>();
    const Index k_hat = (k == n - 1 && even) ? n : k;
    out.phases(k) = -0.5 * kPi * static_cast<double>(k_hat);
  }

  // Guard: at order 1 every column must be a DFT eigenvector with its
  // assigned eigenvalue.
  const CMatrix dft = dft_matrix(n);
  for (Index k = 0; k < n; ++k) {
    const CVector lhs = dft * out.basis.col(k);
    const CVector rhs = std::exp(kJ * out.phases(k)) * out.basis.col(k);
    if ((lhs - rhs).norm() > tol::kReconstruction) {
      throw Error(ErrorCode::construction,
                  "DFRFT eigenvector " + std::to_string(k) + " of n=" + std::to_string(n) +
                      " does not reproduce the DFT eigenvalue");
    }
  }
  return out;
}

inline PhaseDecomposition principal_shifted_decomposition(Index n) {
  // Rotating by e^{j pi/4} moves the DFT eigenvalues {1, -j, -1, j} off the
  // branch cut; the rotation is undone on the phases.
  const CMatrix rotated = std::exp(kJ * (kPi / 4.0)) * dft_matrix(n);
  PhaseDecomposition d = decompose_unitary(rotated, BranchPolicy::raw);
  d.phases.array() -= kPi / 4.0;
  return d;
}

}  // namespace detail

inline std::shared_ptr<const PhaseDecomposition> dfrft_decomposition(Index n, DfrftMode mode) {
  if (n < 2) {
    throw Error(ErrorCode::invalid_size, "DFRFT needs n >= 2, got " + std::to_string(n));
  }
  return std::make_shared<const PhaseDecomposition>(
      mode == DfrftMode::candan ? detail::candan_decomposition(n)
                                : detail::principal_shifted_decomposition(n));
}

/// Discrete fractional Fourier transform F^order of size n.
inline FractionalOperator dfrft_matrix(Index n, double order, DfrftMode mode = DfrftMode::candan) {
  return FractionalOperator(dfrft_decomposition(n, mode), order, OperatorKind::dfrft);
}

}  // namespace gcfrft
