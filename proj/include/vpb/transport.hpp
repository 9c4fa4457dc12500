#pragma once

#include <string>
#include <vector>

#include "vpb/dispersion.hpp"

namespace vpb {

// kappa0 = -(L^{-1} P1(v1 chi_2), v1 chi_2), kappa1 = -(L^{-1} P1(v1 chi_4), v1 chi_4)
struct TransportCoefficients {
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  Backend backend = Backend::hard_sphere;
  int max_degree = 0;
  std::string basis_hash;
  // |kappa(N) - kappa(N+2)|, negative when no refinement was run
  double error_bar0 = -1.0;
  double error_bar1 = -1.0;
};

// Synthetic operators are refused unless `allow_synthetic`; their kappas are
// set by nu_bar alone and say nothing about a collision model.
TransportCoefficients compute_kappas(const CollisionOperator& op, bool allow_synthetic = false);
// values from `coarse`, error bars from the disagreement with `fine`
TransportCoefficients compute_kappas(const CollisionOperator& coarse, const CollisionOperator& fine,
                                     bool allow_synthetic = false);

// |(L^{-1}P1(v1 chi_2), v1 chi_2) - (L^{-1}P1(v2 chi_1), v2 chi_1)|
double isotropy_residual(const CollisionOperator& op);

struct B2Row {
  double s = 0.0;
  double b2_fit = 0.0, b2_formula = 0.0;
  double b0_fit = 0.0, b0_formula = 0.0;
  double b1_fit = 0.0, b1_formula = 0.0;
};

struct B2Report {
  double eps = 0.0;
  std::vector<B2Row> rows;
  double max_rel_err_b2 = 0.0;
  double max_rel_err_b0 = 0.0;
  double max_rel_err_b1 = 0.0;
  double b2_flatness = 0.0;  // spread of b2_fit/s^2 relative to kappa0
};

// Second-order coefficients fitted from the branches: lambda_j = eps eta_j - eps^2 b_j + O(eps^4)
// for the real parts, so -Re lambda_j/eps^2 at eps and eps/2 is Richardson-extrapolated.
B2Report crosscheck_b2(const DispersionContext& ctx, const std::vector<double>& s_grid, double eps);

// Residuals of the three collision-invariant identities
//   Gamma(chi0, chi0) = 0, Gamma(v_i chi0, v_j chi0) = -1/2 L P1(v_i v_j chi0),
//   Gamma(|v|^2 chi0, |v|^2 chi0) = -1/2 L P1(|v|^4 chi0)
// with the Gamma quadrature run `offset` degrees away from its exact level.
struct GammaIdentityLevel {
  int offset = 0;
  double invariant = 0.0;  // |Gamma(chi0, chi0)|
  double quadratic = 0.0;  // worst (i,j), relative
  double quartic = 0.0;    // relative
  double worst() const { return std::max({invariant, quadratic, quartic}); }
};

struct GammaIdentityReport {
  GammaIdentityLevel coarse, fine;
  double tol = 1e-10;
  // floor below which a residual counts as round-off, where strict decrease is not measurable
  double roundoff = 1e-12;
  bool within_tol() const { return fine.worst() <= tol; }
  bool decreasing() const;
};

GammaIdentityLevel gamma_identity_residuals(const CollisionOperator& op, int offset);
// coarse = one refinement step (two degrees) below the exact level, fine = exact level
GammaIdentityReport gamma_identity_report(const CollisionOperator& op, double tol = 1e-10);

}  // namespace vpb
