#include <gtest/gtest.h>

#include <random>

#include "gcfrft/fractional.hpp"
#include "gcfrft/graph.hpp"

using namespace gcfrft;

namespace {

CMatrix random_unitary(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix z(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

Graph cycle4() { return Graph(cartesian_product(path_graph(2), path_graph(2)).adjacency()); }

}  // namespace

TEST(Eigendecompose, PathTwo) {
  const SpectralBasis b = eigendecompose(path_graph(2));
  EXPECT_NEAR(b.lambda(0), 1.0, 1e-14);
  EXPECT_NEAR(b.lambda(1), -1.0, 1e-14);
  const double r = 1.0 / std::sqrt(2.0);
  // sign fix: the largest-magnitude entry (first on ties) is positive
  EXPECT_NEAR(b.v(0, 0), r, 1e-14);
  EXPECT_NEAR(b.v(1, 0), r, 1e-14);
  EXPECT_NEAR(b.v(0, 1), r, 1e-14);
  EXPECT_NEAR(b.v(1, 1), -r, 1e-14);
}

TEST(Eigendecompose, EmptyGraph) {
  const SpectralBasis b = eigendecompose(Graph(Matrix::Zero(3, 3)));
  EXPECT_EQ(b.lambda, Vector::Zero(3));
  EXPECT_EQ(b.v, Matrix::Identity(3, 3));
}

TEST(Eigendecompose, PathThreeEigenvalues) {
  // roots of lambda^3 - 2 lambda
  const SpectralBasis b = eigendecompose(path_graph(3));
  EXPECT_NEAR(b.lambda(0), std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(b.lambda(1), 0.0, 1e-13);
  EXPECT_NEAR(b.lambda(2), -std::sqrt(2.0), 1e-13);
}

TEST(Eigendecompose, OrthonormalAndReconstructs) {
  for (Index n : {5, 12, 31}) {
    const Graph g = path_graph(n);
    const SpectralBasis b = eigendecompose(g);
    const double nd = static_cast<double>(n);
    EXPECT_LE((b.v.transpose() * b.v - Matrix::Identity(n, n)).norm(), 1e-10 * nd);
    EXPECT_LE((b.v * b.lambda.asDiagonal() * b.v.transpose() - g.adjacency()).norm(),
              1e-9 * g.adjacency().norm());
    for (Index k = 1; k < n; ++k) EXPECT_GE(b.lambda(k - 1), b.lambda(k));
  }
}

TEST(GftMatrix, PathTwo) {
  const FractionalOperator f = gft_matrix(eigendecompose(path_graph(2)));
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix expect(2, 2);
  expect << r, r, r, -r;
  EXPECT_LE((f.matrix() - expect).norm(), 1e-14);
  EXPECT_EQ(f.order(), 1.0);
  EXPECT_EQ(f.kind(), OperatorKind::graph);
}

TEST(GftMatrix, InvertsBasis) {
  const SpectralBasis b = eigendecompose(path_graph(7));
  const FractionalOperator f = gft_matrix(b);
  EXPECT_LE((f.matrix() * b.v.cast<Complex>() - CMatrix::Identity(7, 7)).norm(), 1e-12);
}

TEST(GftMatrix, ConstantSignalOnRegularGraphHitsTopMode) {
  const FractionalOperator f = gft_matrix(eigendecompose(cycle4()));
  const CVector y = f.matrix() * CVector::Ones(4);
  EXPECT_NEAR(std::abs(y(0)), 2.0, 1e-12);
  EXPECT_LE(y.tail(3).norm(), 1e-12);
}

TEST(UnitaryPower, IdentityStaysIdentity) {
  for (double a : {-1.3, 0.0, 0.4, 2.5}) {
    EXPECT_LE((unitary_fractional_power(CMatrix::Identity(4, 4), a).matrix() -
               CMatrix::Identity(4, 4))
                  .norm(),
              1e-14);
  }
}

TEST(UnitaryPower, PhaseDoubling) {
  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = kJ;
  u(1, 1) = -kJ;
  const CMatrix m = unitary_fractional_power(u, 2.0).matrix();
  EXPECT_LE((m + CMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(UnitaryPower, HalfPowerOfPathTwoGft) {
  // F_G of path(2) is symmetric orthogonal with eigenvalues +1 and -1;
  // eigenvectors from the 2x2 characteristic equation.
  const CMatrix f = gft_matrix(eigendecompose(path_graph(2))).matrix();
  const double c = std::cos(kPi / 8);
  const double s = std::sin(kPi / 8);
  CMatrix p(2, 2);
  p << c, -s, s, c;  // (+1) eigenvector (cos pi/8, sin pi/8), (-1) orthogonal
  CVector d(2);
  d << 1.0, std::exp(kJ * (kPi / 2));
  const CMatrix expect = p * d.asDiagonal() * p.adjoint();
  CVector signs(2);
  signs << 1.0, -1.0;
  EXPECT_LE((f - p * signs.asDiagonal() * p.adjoint()).norm(), 1e-14);
  EXPECT_LE((unitary_fractional_power(f, 0.5).matrix() - expect).norm(), 1e-12);
}

TEST(UnitaryPower, RejectsNonUnitary) {
  CMatrix m = CMatrix::Identity(3, 3);
  m(0, 1) = 0.1;
  try {
    unitary_fractional_power(m, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_unitary);
  }
}

TEST(UnitaryPower, RandomUnitaryProperties) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Index n = 3 + static_cast<Index>(seed) * 2;
    const double nd = static_cast<double>(n);
    const CMatrix u = random_unitary(n, seed);
    const FractionalOperator f = unitary_fractional_power(u, 1.0);
    EXPECT_LE((f.matrix() - u).norm(), 1e-8 * nd);
    EXPECT_TRUE(f.with_order(0.0).matrix().isIdentity(0));
    for (double a : {-1.5, -0.5, 0.3, 0.5, 2.0}) {
      const FractionalOperator fa = f.with_order(a);
      EXPECT_LE(fa.unitarity_error(), 1e-9 * nd);
      EXPECT_LE(fa.consistency_error(), 1e-9 * nd);
      EXPECT_LE((f.with_order(-a).matrix() - fa.matrix().adjoint()).norm(), 1e-8 * nd);
    }
    EXPECT_LE((f.with_order(0.3).matrix() * f.with_order(0.45).matrix() -
               f.with_order(0.75).matrix())
                  .norm(),
              1e-8 * nd);
    for (Index k = 1; k < n; ++k) EXPECT_GE(f.phases()(k - 1), f.phases()(k));
  }
}

TEST(UnitaryPower, EigenspaceRemixingInvariance) {
  // unitary with a threefold eigenvalue e^{j 0.7}
  const CMatrix q = random_unitary(5, 11);
  CVector d(5);
  d << std::exp(kJ * 0.7), std::exp(kJ * 0.7), std::exp(kJ * 0.7), std::exp(-kJ * 1.1), -1.0;
  const CMatrix u = q * d.asDiagonal() * q.adjoint();
  const CMatrix reference = unitary_fractional_power(u, 0.37).matrix();
  for (std::uint64_t seed : {21u, 22u}) {
    CMatrix mixed = q;
    mixed.leftCols(3) = q.leftCols(3) * random_unitary(3, seed);
    CVector da(5);
    for (Index k = 0; k < 5; ++k) da(k) = std::exp(kJ * (0.37 * std::arg(d(k))));
    da(4) = std::exp(kJ * (0.37 * kPi));  // branch: theta = +pi
    EXPECT_LE((mixed * da.asDiagonal() * mixed.adjoint() - reference).norm(), 1e-8 * 5);
  }
}

TEST(GraphFrft, OrderZeroOneAndAdditivity) {
  for (const Graph& g : {path_graph(6), cycle4(), path_graph(9)}) {
    const SpectralBasis b = eigendecompose(g);
    const double nd = static_cast<double>(g.size());
    const FractionalOperator f1 = gft_matrix(b);
    EXPECT_TRUE(graph_frft(b, 0.0).matrix().isIdentity(0));
    EXPECT_LE((graph_frft(b, 1.0).matrix() - f1.matrix()).norm(), 1e-8 * nd);
    const CMatrix half = graph_frft(b, 0.5).matrix();
    EXPECT_LE((half * half - f1.matrix()).norm(), 1e-8 * nd);
  }
}

TEST(GraphFrft, Deterministic) {
  const SpectralBasis b = eigendecompose(path_graph(8));
  EXPECT_EQ(graph_frft(b, 0.37).matrix(), graph_frft(b, 0.37).matrix());
}

TEST(Dfrft, OrderZeroIsIdentity) {
  for (Index n : {2, 5, 8}) {
    EXPECT_LE((dfrft_matrix(n, 0.0).matrix() - CMatrix::Identity(n, n)).norm(), 1e-9 * n);
  }
}

TEST(Dfrft, OrderOneIsUnitaryDft) {
  for (Index n = 2; n <= 40; ++n) {
    const CMatrix f = dft_matrix(n);
    EXPECT_NEAR(std::abs(f(1, 1) - std::polar(1.0 / std::sqrt(double(n)), -2 * kPi / n)), 0.0,
                1e-15);
    EXPECT_LE((dfrft_matrix(n, 1.0).matrix() - f).norm(), 1e-8 * n) << "n=" << n;
  }
}

TEST(Dfrft, HalfTwiceIsOne) {
  for (Index n : {3, 4, 7, 16}) {
    const FractionalOperator h = dfrft_matrix(n, 0.5);
    EXPECT_LE((h.matrix() * h.matrix() - dft_matrix(n)).norm(), 1e-8 * n);
  }
}

TEST(Dfrft, UnitaryAndAdditiveForManyOrders) {
  for (Index n : {2, 3, 6, 11, 16}) {
    const FractionalOperator f = dfrft_matrix(n, 1.0);
    for (double a : {-1.5, -0.5, 0.3, 2.0}) {
      EXPECT_LE(f.with_order(a).unitarity_error(), 1e-9 * n);
      EXPECT_LE((f.with_order(a).matrix() * f.with_order(0.25).matrix() -
                 f.with_order(a + 0.25).matrix())
                    .norm(),
                1e-8 * n);
    }
    // order 4 is the identity for the DFT
    EXPECT_LE((f.with_order(4.0).matrix() - CMatrix::Identity(n, n)).norm(), 1e-8 * n);
  }
}

TEST(Dfrft, PrincipalShiftedModeReproducesDft) {
  for (Index n : {2, 5, 8}) {
    const FractionalOperator f = dfrft_matrix(n, 1.0, DfrftMode::principal_shifted);
    EXPECT_LE((f.matrix() - dft_matrix(n)).norm(), 1e-8 * n);
    EXPECT_LE(f.with_order(0.4).unitarity_error(), 1e-9 * n);
  }
}

TEST(Dfrft, RejectsTinySize) { EXPECT_THROW(dfrft_matrix(1, 0.5), Error); }
