#include "vpb/transport.hpp"

#include <algorithm>
#include <cmath>

namespace vpb {

TransportCoefficients compute_kappas(const CollisionOperator& op, bool allow_synthetic)
{
  if (!op.kernel().genuine() && !allow_synthetic)
    throw DomainError("compute_kappas: the synthetic backend has no physical transport coefficients");
  const AsymptoticCoefficients c = AsymptoticCoefficients::from(op);
  TransportCoefficients t;
  t.kappa0 = -c.A22;
  t.kappa1 = -c.A44;
  t.backend = op.backend();
  t.max_degree = op.basis().max_degree();
  t.basis_hash = op.basis().hash();
  if (!(t.kappa0 > 0.0 && t.kappa1 > 0.0))
    throw AssemblyFailure("compute_kappas: non-positive transport coefficient (kappa0=" + std::to_string(t.kappa0) +
                          ", kappa1=" + std::to_string(t.kappa1) + ")");
  return t;
}

TransportCoefficients compute_kappas(const CollisionOperator& coarse, const CollisionOperator& fine,
                                     bool allow_synthetic)
{
  TransportCoefficients t = compute_kappas(coarse, allow_synthetic);
  const TransportCoefficients f = compute_kappas(fine, allow_synthetic);
  t.error_bar0 = std::abs(t.kappa0 - f.kappa0);
  t.error_bar1 = std::abs(t.kappa1 - f.kappa1);
  return t;
}

double isotropy_residual(const CollisionOperator& op)
{
  const VelocityBasis& b = op.basis();
  const Vec a = b.mult(0) * b.chi(2);
  const Vec c = b.mult(1) * b.chi(1);
  const double x = op.solve_Linv(Vec(b.P1() * a)).dot(a);
  const double y = op.solve_Linv(Vec(b.P1() * c)).dot(c);
  return std::abs(x - y);
}

B2Report crosscheck_b2(const DispersionContext& ctx, const std::vector<double>& s_grid, double eps)
{
  B2Report rep;
  rep.eps = eps;
  const AsymptoticCoefficients& c = ctx.coeffs();
  const double kappa0 = -c.A22;
  auto rel = [](double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); };
  double lo = 1e300, hi = -1e300;
  for (double s : s_grid) {
    B2Row row;
    row.s = s;
    row.b2_formula = c.b(2, s);
    row.b0_formula = c.b(0, s);
    row.b1_formula = c.b(1, s);
    auto fitted = [&](auto&& re_lambda) {
      const double q1 = -re_lambda(eps) / (eps * eps);
      const double q2 = -re_lambda(0.5 * eps) / (0.25 * eps * eps);
      return (4.0 * q2 - q1) / 3.0;
    };
    if (s == 0.0) {  // every b_j carries s^2
      rep.rows.push_back(row);
      continue;
    }
    row.b2_fit = fitted([&](double e) { return solve_D0(ctx, s, e).z.real(); });
    row.b0_fit = fitted([&](double e) { return e * solve_D1(ctx, s, e)[1].z.real(); });
    row.b1_fit = fitted([&](double e) { return e * solve_D1(ctx, s, e)[2].z.real(); });
    rep.max_rel_err_b2 = std::max(rep.max_rel_err_b2, rel(row.b2_fit, row.b2_formula));
    rep.max_rel_err_b0 = std::max(rep.max_rel_err_b0, rel(row.b0_fit, row.b0_formula));
    rep.max_rel_err_b1 = std::max(rep.max_rel_err_b1, rel(row.b1_fit, row.b1_formula));
    lo = std::min(lo, row.b2_fit / (s * s));
    hi = std::max(hi, row.b2_fit / (s * s));
    rep.rows.push_back(row);
  }
  rep.b2_flatness = hi >= lo ? (hi - lo) / kappa0 : 0.0;
  return rep;
}

}  // namespace vpb

namespace vpb {

GammaIdentityLevel gamma_identity_residuals(const CollisionOperator& op, int offset)
{
  if (!op.kernel().genuine()) throw DomainError("Gamma identities: the synthetic backend has no Gamma");
  const VelocityBasis& b = op.basis();
  if (b.max_degree() < 4) throw DomainError("Gamma identities: |v|^4 chi0 needs max_degree >= 4");
  const GammaForm G(op);
  auto level = [&](const Vec& f, const Vec& g) { return std::max(1, G.default_exactness(f, g) + offset); };
  auto rel = [](const Vec& got, const Vec& expect) { return (got - expect).norm() / std::max(1.0, expect.norm()); };

  GammaIdentityLevel out;
  out.offset = offset;
  const Vec c0 = b.chi(0);
  // Gamma(chi0, chi0) = 0 is reported at the exactness of the quadratic identity
  out.invariant = G.apply(c0, c0, level(b.mult(0) * c0, b.mult(0) * c0)).norm();
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const Vec fi = b.mult(i) * c0, fj = b.mult(j) * c0;
      const Vec expect = -0.5 * op.L() * (b.P1() * (b.mult(i) * fj));
      out.quadratic = std::max(out.quadratic, rel(G.apply(fi, fj, level(fi, fj)), expect));
    }
  const Vec v2 = b.coefficients([](const Vec3& v) { return v.squaredNorm(); });
  const Vec v4 = b.coefficients([](const Vec3& v) { return std::pow(v.squaredNorm(), 2); });
  out.quartic = rel(G.apply(v2, v2, level(v2, v2)), -0.5 * op.L() * (b.P1() * v4));
  return out;
}

bool GammaIdentityReport::decreasing() const
{
  auto ok = [&](double c, double f) { return f < c || std::max(c, f) <= roundoff; };
  return ok(coarse.invariant, fine.invariant) && ok(coarse.quadratic, fine.quadratic) &&
         ok(coarse.quartic, fine.quartic);
}

GammaIdentityReport gamma_identity_report(const CollisionOperator& op, double tol)
{
  GammaIdentityReport r;
  r.tol = tol;
  r.coarse = gamma_identity_residuals(op, -2);
  r.fine = gamma_identity_residuals(op, 0);
  return r;
}

}  // namespace vpb
