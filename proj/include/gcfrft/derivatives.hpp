#pragma once

// Order derivatives of the temporal operators, including the geodesic basis
// F_G2^beta exp(lambda log W(beta)). Frechet derivatives of log and exp are
// taken in the eigenbasis S of W, where both act as Hadamard products with
// divided-difference matrices (Daleckii-Krein).

#include <cmath>

#include "gcfrft/coupling.hpp"
#include "gcfrft/fractional.hpp"
#include "gcfrft/transforms.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

namespace detail {
inline double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}
}  // namespace detail

/// L_log(W; E) for unitary W = S diag(e^{j theta}) S^H with |theta| < pi.
inline CMatrix frechet_log_unitary(const CouplingDecomposition& w, const CMatrix& e) {
  const CMatrix& s = w.s();
  const Vector& th = w.theta();
  CMatrix m = s.adjoint() * e * s;
  for (Index k = 0; k < m.rows(); ++k) {
    for (Index l = 0; l < m.cols(); ++l) {
      // (j th_k - j th_l) / (e^{j th_k} - e^{j th_l})
      const double half = 0.5 * (th(k) - th(l));
      const double mid = 0.5 * (th(k) + th(l));
      m(k, l) *= std::exp(-kJ * mid) / detail::sinc(half);
    }
  }
  return s * m * s.adjoint();
}

/// L_exp(lambda log W; E), with lambda log W = S diag(j lambda theta) S^H.
inline CMatrix frechet_exp_skew(const CouplingDecomposition& w, double lambda,
                                const CMatrix& e) {
  const CMatrix& s = w.s();
  const Vector& th = w.theta();
  CMatrix m = s.adjoint() * e * s;
  for (Index k = 0; k < m.rows(); ++k) {
    for (Index l = 0; l < m.cols(); ++l) {
      // (e^{mu_k} - e^{mu_l}) / (mu_k - mu_l), mu = j lambda theta
      const double half = 0.5 * lambda * (th(k) - th(l));
      const double mid = 0.5 * lambda * (th(k) + th(l));
      m(k, l) *= std::exp(kJ * mid) * detail::sinc(half);
    }
  }
  return s * m * s.adjoint();
}

/// d/d(beta) of F_G2^beta exp(lambda log W(beta)), W = (F_G2^beta)^H F^beta.
inline CMatrix geodesic_beta_derivative(const FractionalOperator& f_g2_beta,
                                        const FractionalOperator& f_beta,
                                        const CouplingDecomposition& w, double lambda) {
  const CMatrix d_graph = f_g2_beta.derivative();
  const CMatrix d_dfrft = f_beta.derivative();
  const CMatrix d_w =
      d_graph.adjoint() * f_beta.matrix() + f_g2_beta.matrix().adjoint() * d_dfrft;
  const CMatrix e = lambda * frechet_log_unitary(w, d_w);
  const CMatrix d_geo = frechet_exp_skew(w, lambda, e);
  return d_graph * w.geodesic_factor(lambda) + f_g2_beta.matrix() * d_geo;
}

}  // namespace gcfrft
