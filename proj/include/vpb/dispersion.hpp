#pragma once

#include <array>
#include <vector>

#include <Eigen/LU>

#include "vpb/mode_operator.hpp"

namespace vpb {

// Small-parameter regime: eps|s| <= r0 and roots within r1 |s| of their seeds.
struct Regime {
  double r0 = 0.3;
  double r1 = 0.1;
};

// Closed-form leading terms for a branch j in {-1,0,1,2,3}.
// A_k = (L^{-1} P1(v1 chi_k), v1 chi_k), so kappa0 = -A_2 and kappa1 = -A_4.
struct AsymptoticCoefficients {
  double A11 = 0.0, A22 = 0.0, A44 = 0.0;

  static AsymptoticCoefficients from(const CollisionOperator& op);

  static cplx eta(int j, double s);
  double b(int j, double s) const;
  // leading eigenfunctions h_j(xi) of D(xi), orthonormal in (.,.)_xi
  CVec h(const VelocityBasis& basis, int j, const Vec3& xi) const;
  // P0 e_j(s, 0) on the canonical mode s e_1
  CVec g(const VelocityBasis& basis, int j, double s) const;
};

// Micro-subspace pieces shared by every resolvent evaluation.
class DispersionContext {
 public:
  explicit DispersionContext(const CollisionOperator& op, Regime regime = {});

  const CollisionOperator& op() const { return op_; }
  const VelocityBasis& basis() const { return op_.basis(); }
  const Regime& regime() const { return regime_; }
  double mu() const { return op_.mu_estimate(); }
  const AsymptoticCoefficients& coeffs() const { return coeffs_; }

  // R_jk(beta, s) = (R(beta,s) P1(v1 chi_j), v1 chi_k),
  // R(beta,s) = (L - beta P1 - i s P1 v1 P1)^{-1} on the micro subspace
  cplx resolvent_entry(int j, int k, cplx beta, double s) const;

  // entries for j,k in `idx` together with their beta-derivatives
  struct Block {
    CMat R, dR;
  };
  Block resolvent_block(const std::vector<int>& idx, cplx beta, double s) const;

  // micro-subspace coordinates of P1(v1 chi_j)
  const Vec& r(int j) const { return r_[j]; }

 private:
  Eigen::PartialPivLU<CMat> factor(cplx beta, double s) const;

  const CollisionOperator& op_;
  Regime regime_;
  AsymptoticCoefficients coeffs_;
  Mat Lmic_;
  Mat V1mic_;
  std::array<Vec, 5> r_;
};

// D0(z, y) = z - y^2 R22(z, y), derivative included
struct ScalarEval {
  cplx value, derivative;
};
ScalarEval eval_D0(const DispersionContext& ctx, cplx z, double y);

// 3x3 matrix whose determinant is D1(z; s, eps), on (chi_0, chi_1, chi_4)
CMat D1_matrix(const DispersionContext& ctx, cplx z, double s, double eps, CMat* dMdz = nullptr);
ScalarEval eval_D1(const DispersionContext& ctx, cplx z, double s, double eps);

struct RootInfo {
  cplx z;
  double residual = 0.0;
  int iterations = 0;
  std::string method;  // newton, bisection, contraction, continuation
  bool within_r1 = true;
};

// transverse root: lambda_{2,3} = z with D0(z, eps s) = 0
RootInfo solve_D0(const DispersionContext& ctx, double s, double eps);
// the three roots z_{-1}, z_0, z_1 with lambda_j = eps z_j
std::array<RootInfo, 3> solve_D1(const DispersionContext& ctx, double s, double eps);

struct BranchPoint {
  int branch = 0;
  double s = 0.0;
  double eps = 0.0;
  cplx lambda;
  cplx z;
  CVec psi;
  double det_residual = 0.0;
  double eig_residual = 0.0;  // ||B psi - lambda psi||_xi
};

struct HydroSpectrum {
  std::array<BranchPoint, 5> branches;  // j = -1, 0, 1, 2, 3
  double gap_alpha = 0.0;               // -max Re of the remaining spectrum
  std::vector<cplx> rest;
  Mat3 rotation;
  const BranchPoint& branch(int j) const { return branches[j + 1]; }
};

HydroSpectrum hydrodynamic_spectrum(const DispersionContext& ctx, const ModeOperator& mode);

// all eigenvalues of the dense matrix
std::vector<cplx> dense_spectrum(const ModeOperator& mode);
// largest real part over the spectrum of B_eps(s e_1)
double spectral_abscissa(const DispersionContext& ctx, double s, double eps);

struct ExpansionReport {
  int branch = 0;
  double s = 0.0;
  std::vector<double> eps;
  std::vector<double> macro_residual;  // ||P0 e_j - g_j||_xi
  std::vector<double> micro_residual;  // ||P1 e_j - i eps s L^{-1} P1(v1 g_j)||
  std::vector<double> normalization;   // a^2 (1 + 1/s^2) + b^2 + c^2 of P0 e_j
  double macro_slope = 0.0;
  double micro_slope = 0.0;
};

ExpansionReport eigenfunction_expansion_check(const DispersionContext& ctx, int branch, double s,
                                              const std::vector<double>& eps_list);

}  // namespace vpb
