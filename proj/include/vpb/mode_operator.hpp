#pragma once

#include "vpb/collision.hpp"

namespace vpb {

// B_eps(xi) = L - i eps (v.xi) - i eps (v.xi)/|xi|^2 P_d on one Fourier mode,
// together with the metric G of (f,g)_xi = g^H G f.
struct ModeOperator {
  Vec3 xi;
  double eps = 0.0;
  double s = 0.0;  // |xi|
  CMat B;
  Mat metric;
};

ModeOperator assemble_B(const CollisionOperator& L, const Vec3& xi, double eps);
// B on the canonical mode s e_1
ModeOperator assemble_B(const CollisionOperator& L, double s, double eps);

struct Reduction {
  double s = 0.0;
  Mat3 rotation;  // proper rotation with rotation * xi/|xi| = e_1
};

Reduction reduce_to_1d(const Vec3& xi);

// coefficient matrix of (T_O f)(v) = f(O v); maps eigenvectors of B(|xi| e_1) to B(xi)
Mat pushforward(const VelocityBasis& basis, const Mat3& O);

// adjoint of B with respect to (.,.)_xi: G^{-1} B^H G
CMat metric_adjoint(const ModeOperator& m);

// largest eigenvalue of the xi-metric Hermitian part of B
double numerical_abscissa(const ModeOperator& m);

// norm of an operator in the xi-metric
double metric_operator_norm(const CMat& T, double s);

}  // namespace vpb
