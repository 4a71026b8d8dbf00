#pragma once

// Geodesic coupling between the graph-induced temporal basis F_G2^beta and
// the DFRFT basis F^beta on the unitary group.

#include <cmath>
#include <memory>
#include <ostream>
#include <string>

#include "gcfrft/error.hpp"
#include "gcfrft/fractional.hpp"
#include "gcfrft/types.hpp"

namespace gcfrft {

inline constexpr double kDefaultMarginTolerance = 1e-6;

/// W_t = S diag(e^{j theta}) S^H with principal phases theta in (-pi, pi)
/// and margin = min_k (pi - |theta_k|) > 0.
struct CouplingDecomposition {
  std::shared_ptr<const PhaseDecomposition> phases;
  double margin = 0.0;

  const CMatrix& s() const noexcept { return phases->basis; }
  const Vector& theta() const noexcept { return phases->phases; }
  Index size() const noexcept { return phases->size(); }

  /// exp(lambda log W_t).
  CMatrix geodesic_factor(double lambda) const { return phases->power(lambda); }
};

/// Relative change-of-basis operator W_t = (F_G2^beta)^H F^beta.
inline CMatrix coupling_operator(const FractionalOperator& f_g2_beta,
                                 const FractionalOperator& f_beta) {
  if (f_g2_beta.size() != f_beta.size()) {
    throw Error(ErrorCode::size_mismatch, "coupling endpoints differ in size");
  }
  const double n = static_cast<double>(f_beta.size());
  if (f_g2_beta.unitarity_error() > tol::kUnitaryInput * n ||
      f_beta.unitarity_error() > tol::kUnitaryInput * n) {
    throw Error(ErrorCode::not_unitary, "coupling endpoints must be unitary");
  }
  return f_g2_beta.matrix().adjoint() * f_beta.matrix();
}

/// Eigenphase decomposition of W_t, checked against the principal-log
/// assumption: no eigenphase may come within margin_tol of +-pi.
inline CouplingDecomposition phase_decompose(const CMatrix& w,
                                             double margin_tol = kDefaultMarginTolerance) {
  auto d = std::make_shared<const PhaseDecomposition>(decompose_unitary(w, BranchPolicy::raw));
  double margin = kPi;
  Index worst = 0;
  for (Index k = 0; k < d->phases.size(); ++k) {
    const double m = kPi - std::abs(d->phases(k));
    if (m < margin) {
      margin = m;
      worst = k;
    }
  }
  if (!(margin > margin_tol)) {
    throw AssumptionViolated("coupling operator has eigenphase " +
                                 std::to_string(d->phases(worst)) + " at index " +
                                 std::to_string(worst) + " (margin " + std::to_string(margin) +
                                 " <= " + std::to_string(margin_tol) + ")",
                             margin, static_cast<long>(worst));
  }
  return CouplingDecomposition{std::move(d), margin};
}

namespace detail {
inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::domain,
                "coupling parameter lambda=" + std::to_string(lambda) + " outside [0, 1]");
  }
}
}  // namespace detail

/// F_t,GC(lambda; beta) = F_G2^beta S diag(e^{j lambda theta}) S^H.
inline FractionalOperator geodesic_temporal_basis(const FractionalOperator& f_g2_beta,
                                                  const CouplingDecomposition& decomp,
                                                  double lambda) {
  detail::check_lambda(lambda);
  if (f_g2_beta.size() != decomp.size()) {
    throw Error(ErrorCode::size_mismatch, "temporal basis and coupling differ in size");
  }
  return FractionalOperator(decomp.phases, lambda, OperatorKind::geodesic, f_g2_beta.matrix());
}

/// Swapped endpoints: F^beta exp(lambda log((F^beta)^H F_G2^beta)). The
/// caller passes the decomposition of the swapped coupling operator.
inline FractionalOperator swapped_geodesic_temporal_basis(
    const FractionalOperator& f_beta, const CouplingDecomposition& swapped_decomp,
    double lambda) {
  return geodesic_temporal_basis(f_beta, swapped_decomp, lambda);
}

/// CSV diagnostic: header `k,theta`, one row per eigenphase, then `margin,<value>`.
inline void write_phase_diagnostics(std::ostream& os, const CouplingDecomposition& decomp) {
  os.precision(17);
  os << "k,theta\n";
  for (Index k = 0; k < decomp.theta().size(); ++k) os << k << ',' << decomp.theta()(k) << '\n';
  os << "margin," << decomp.margin << '\n';
}

}  // namespace gcfrft
