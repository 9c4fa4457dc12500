#include "vpb/mode_operator.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace vpb {

namespace {

void check_eps(double eps)
{
  if (!(eps > 0.0 && eps < 1.0))
    throw DomainError("eps must lie in (0,1), got " + std::to_string(eps));
}

}  // namespace

ModeOperator assemble_B(const CollisionOperator& L, const Vec3& xi, double eps)
{
  check_eps(eps);
  const double s = xi.norm();
  if (!(s > 0.0)) throw DomainError("assemble_B: xi = 0 is excluded, the Poisson term is singular");
  const VelocityBasis& b = L.basis();
  const int n = b.dim();
  const Mat Vxi = b.mult_along(xi);

  ModeOperator m;
  m.xi = xi;
  m.eps = eps;
  m.s = s;
  m.B = L.L().cast<cplx>();
  m.B -= (kI * eps) * Vxi.cast<cplx>();
  // (v.xi)/|xi|^2 P_d only touches the density column
  m.B.col(0) -= (kI * (eps / (s * s))) * Vxi.col(0).cast<cplx>();
  m.metric = weighted_metric(n, s);
  return m;
}

ModeOperator assemble_B(const CollisionOperator& L, double s, double eps)
{
  return assemble_B(L, Vec3(s, 0.0, 0.0), eps);
}

Reduction reduce_to_1d(const Vec3& xi)
{
  const double s = xi.norm();
  if (!(s > 0.0)) throw DomainError("reduce_to_1d: xi = 0 has no direction");
  const Vec3 d = xi / s;
  Reduction r;
  r.s = s;
  const Vec3 w = d - Vec3::UnitX();
  if (w.norm() < 1e-15) {
    r.rotation = Mat3::Identity();
    return r;
  }
  // Householder reflection sends d to e_1; flipping e_3 restores det = +1
  const Mat3 H = Mat3::Identity() - 2.0 * w * w.transpose() / w.squaredNorm();
  Mat3 F = Mat3::Identity();
  F(2, 2) = -1.0;
  r.rotation = F * H;
  return r;
}

Mat pushforward(const VelocityBasis& basis, const Mat3& O)
{
  return basis.rotation_operator(O);
}

CMat metric_adjoint(const ModeOperator& m)
{
  const Vec g = m.metric.diagonal();
  return g.cwiseInverse().asDiagonal() * m.B.adjoint() * g.asDiagonal();
}

double numerical_abscissa(const ModeOperator& m)
{
  // with G = D^2 diagonal, D B D^{-1} is B in an orthonormal frame of (.,.)_xi
  const Vec d = m.metric.diagonal().cwiseSqrt();
  const CMat T = d.asDiagonal() * m.B * d.cwiseInverse().asDiagonal();
  const CMat H = 0.5 * (T + T.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double metric_operator_norm(const CMat& T, double s)
{
  Vec d = Vec::Ones(T.rows());
  d[0] = std::sqrt(1.0 + 1.0 / (s * s));
  const CMat X = d.asDiagonal() * T * d.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<CMat> svd(X);
  return svd.singularValues()(0);
}

}  // namespace vpb
