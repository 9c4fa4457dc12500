#include "vpb/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "vpb/fit.hpp"

namespace vpb {

// ---------------------------------------------------------------------------
// closed forms

AsymptoticCoefficients AsymptoticCoefficients::from(const CollisionOperator& op)
{
  const VelocityBasis& b = op.basis();
  auto A = [&](int k) {
    const Vec w = b.mult(0) * b.chi(k);
    return op.solve_Linv(Vec(b.P1() * w)).dot(w);
  };
  AsymptoticCoefficients c;
  c.A11 = A(1);
  c.A22 = A(2);
  c.A44 = A(4);
  return c;
}

cplx AsymptoticCoefficients::eta(int j, double s)
{
  if (j == 1 || j == -1) return cplx(0.0, j * std::sqrt(1.0 + 5.0 / 3.0 * s * s));
  if (j == 0 || j == 2 || j == 3) return 0.0;
  throw DomainError("branch index must be in {-1,0,1,2,3}");
}

double AsymptoticCoefficients::b(int j, double s) const
{
  const double s2 = s * s;
  switch (j) {
    case 0: return -3.0 * (s2 + s2 * s2) / (3.0 + 5.0 * s2) * A44;
    case 1:
    case -1: return -0.5 * s2 * A11 - s2 * s2 / (3.0 + 5.0 * s2) * A44;
    case 2:
    case 3: return -s2 * A22;
  }
  throw DomainError("branch index must be in {-1,0,1,2,3}");
}

CVec AsymptoticCoefficients::h(const VelocityBasis& basis, int j, const Vec3& xi) const
{
  const double s = xi.norm();
  if (!(s > 0.0)) throw DomainError("h_j needs xi != 0");
  const double s2 = s * s;
  const double q = std::sqrt(3.0 + 5.0 * s2);
  const Mat& chi = basis.invariants();
  auto along = [&](const Vec3& d) -> Vec { return d[0] * chi.col(1) + d[1] * chi.col(2) + d[2] * chi.col(3); };
  Vec out;
  switch (j) {
    case 0:
      out = std::sqrt(2.0) * s2 / (q * std::sqrt(1.0 + s2)) * chi.col(0) - std::sqrt(3.0 + 3.0 * s2) / q * chi.col(4);
      break;
    case 1:
    case -1:
      // momentum sign chosen so that D(xi) h_j = eta_j h_j with eta_{+1} = +i sqrt(1 + 5s^2/3)
      out = std::sqrt(1.5) * s / q * chi.col(0) - j * std::sqrt(0.5) * along(xi / s) + s / q * chi.col(4);
      break;
    case 2:
    case 3: {
      const Mat3 O = reduce_to_1d(xi).rotation;
      out = along(O.transpose().col(j - 1));
      break;
    }
    default: throw DomainError("branch index must be in {-1,0,1,2,3}");
  }
  return out.cast<cplx>();
}

CVec AsymptoticCoefficients::g(const VelocityBasis& basis, int j, double s) const
{
  const CVec hj = h(basis, j, Vec3(s, 0.0, 0.0));
  return j == 0 ? CVec(-hj) : hj;
}

// ---------------------------------------------------------------------------
// resolvent

DispersionContext::DispersionContext(const CollisionOperator& op, Regime regime)
    : op_(op), regime_(regime), coeffs_(AsymptoticCoefficients::from(op))
{
  const VelocityBasis& b = op.basis();
  const Mat& Q = op.micro_basis();
  Lmic_ = op.L_micro();
  V1mic_ = Q.transpose() * b.mult(0) * Q;
  for (int j = 0; j < 5; ++j) r_[j] = Q.transpose() * (b.mult(0) * b.chi(j));
}

Eigen::PartialPivLU<CMat> DispersionContext::factor(cplx beta, double s) const
{
  if (!(beta.real() > -mu()))
    throw DomainError("resolvent: Re beta = " + std::to_string(beta.real()) + " is not above -mu = " +
                      std::to_string(-mu()));
  CMat A = Lmic_.cast<cplx>();
  A -= (kI * s) * V1mic_.cast<cplx>();
  A.diagonal().array() -= beta;
  return Eigen::PartialPivLU<CMat>(A);
}

namespace {

void check_solve(const Eigen::PartialPivLU<CMat>& lu, const CVec& u, const CVec& rhs)
{
  const double res = (lu.reconstructedMatrix() * u - rhs).norm();
  if (!(res <= 1e-9 * std::max(1.0, rhs.norm())))
    throw SolverFailure("resolvent solve residual " + std::to_string(res) + " (beta near the essential spectrum?)");
}

}  // namespace

cplx DispersionContext::resolvent_entry(int j, int k, cplx beta, double s) const
{
  if (j < 0 || j > 4 || k < 0 || k > 4) throw DomainError("resolvent_entry: index outside 0..4");
  const auto lu = factor(beta, s);
  const CVec rhs = r_[j].cast<cplx>();
  const CVec u = lu.solve(rhs);
  check_solve(lu, u, rhs);
  return r_[k].cast<cplx>().dot(u);  // r_k is real, so this is the bilinear pairing
}

DispersionContext::Block DispersionContext::resolvent_block(const std::vector<int>& idx, cplx beta, double s) const
{
  const auto lu = factor(beta, s);
  const int m = static_cast<int>(idx.size());
  CMat rhs(Lmic_.rows(), m);
  for (int a = 0; a < m; ++a) rhs.col(a) = r_[idx[a]].cast<cplx>();
  const CMat U = lu.solve(rhs);
  const CMat W = lu.solve(U);  // dR/dbeta = R^2
  for (int a = 0; a < m; ++a) check_solve(lu, U.col(a), rhs.col(a));
  Block out;
  // R(a,b) = (R r_a, r_b)
  out.R = U.transpose() * rhs;
  out.dR = W.transpose() * rhs;
  return out;
}

// ---------------------------------------------------------------------------
// determinants

ScalarEval eval_D0(const DispersionContext& ctx, cplx z, double y)
{
  const auto blk = ctx.resolvent_block({2}, z, y);
  return {z - y * y * blk.R(0, 0), 1.0 - y * y * blk.dR(0, 0)};
}

CMat D1_matrix(const DispersionContext& ctx, cplx z, double s, double eps, CMat* dMdz)
{
  const auto blk = ctx.resolvent_block({1, 4}, eps * z, eps * s);
  const double c = eps * s * s;
  const cplx is = kI * s;
  CMat M(3, 3);
  M << z, is, 0.0,
       kI * (s + 1.0 / s), z - c * blk.R(0, 0), kSqrt23 * is - c * blk.R(1, 0),
       0.0, kSqrt23 * is - c * blk.R(0, 1), z - c * blk.R(1, 1);
  if (dMdz) {
    CMat D = CMat::Identity(3, 3);
    D.bottomRightCorner(2, 2) -= (c * eps) * blk.dR.transpose();
    *dMdz = D;
  }
  return M;
}

namespace {

CMat adjugate3(const CMat& M)
{
  CMat A(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      A(j, i) = M(i1, j1) * M(i2, j2) - M(i1, j2) * M(i2, j1);
    }
  return A;
}

}  // namespace

ScalarEval eval_D1(const DispersionContext& ctx, cplx z, double s, double eps)
{
  CMat dM;
  const CMat M = D1_matrix(ctx, z, s, eps, &dM);
  const CMat adj = adjugate3(M);
  const cplx det = (M.row(0) * adj.col(0))(0, 0);
  return {det, (adj * dM).trace()};
}

namespace {

void check_regime(const DispersionContext& ctx, double s, double eps, bool allow_zero_s = false)
{
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
  if (!(s > 0.0 || (allow_zero_s && s == 0.0))) throw DomainError("s must be positive");
  if (eps * s > ctx.regime().r0 * (1.0 + 1e-12))
    throw RegimeViolation("eps*s = " + std::to_string(eps * s) + " exceeds r0 = " + std::to_string(ctx.regime().r0));
}

template <class F>
bool newton(F&& f, cplx& z, double max_step, int& iters)
{
  for (iters = 0; iters < 60; ++iters) {
    const ScalarEval e = f(z);
    if (e.value == 0.0) return true;
    if (e.derivative == 0.0) return false;
    cplx dz = e.value / e.derivative;
    if (std::abs(dz) > max_step) dz *= max_step / std::abs(dz);
    z -= dz;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    if (std::abs(dz) <= 1e-13 * (1.0 + std::abs(z))) return true;
  }
  return false;
}

int nearest_seed(cplx z, const std::array<cplx, 3>& seeds)
{
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(z - seeds[k]) < std::abs(z - seeds[best])) best = k;
  return best;
}

}  // namespace

RootInfo solve_D0(const DispersionContext& ctx, double s, double eps)
{
  check_regime(ctx, s, eps, true);
  const double y = eps * s;
  auto f = [&](cplx z) { return eval_D0(ctx, z, y); };
  RootInfo out;
  cplx z = 0.0;
  const bool ok = newton(f, z, 0.25 * ctx.mu(), out.iterations);
  if (ok && std::abs(z.imag()) <= 1e-10 * (std::abs(z) + 1e-300) + 1e-300 && z.real() > -0.5 * ctx.mu()) {
    out.z = z.real();
    out.method = "newton";
  } else {
    // D0 is real on the real axis, positive at 0 and negative at -mu/2
    double lo = -0.5 * ctx.mu(), hi = 0.0;
    auto g = [&](double x) { return f(x).value.real(); };
    double glo = g(lo), ghi = g(hi);
    if (glo * ghi > 0) throw RegimeViolation("solve_D0: no sign change on [-mu/2, 0] at s=" + std::to_string(s));
    for (out.iterations = 0; out.iterations < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++out.iterations) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if ((gm < 0) == (glo < 0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    out.z = 0.5 * (lo + hi);
    out.method = "bisection";
  }
  out.residual = std::abs(f(out.z).value);
  out.within_r1 = std::abs(out.z) <= ctx.regime().r1 * s;
  return out;
}

std::array<RootInfo, 3> solve_D1(const DispersionContext& ctx, double s, double eps)
{
  check_regime(ctx, s, eps);
  const std::array<cplx, 3> seeds{AsymptoticCoefficients::eta(-1, s), 0.0, AsymptoticCoefficients::eta(1, s)};
  auto f = [&](cplx z) { return eval_D1(ctx, z, s, eps); };
  const double max_step = 0.25 * std::abs(seeds[2]);  // a quarter of the seed separation

  auto attempt_newton = [&](int k, cplx z0, RootInfo& out) {
    cplx z = z0;
    if (!newton(f, z, max_step, out.iterations) || nearest_seed(z, seeds) != k) return false;
    out.z = z;
    return true;
  };

  // the map z -> eigenvalue of A(z) = z - M(z) nearest the seed; its derivative is O(eps^2 s^2)
  auto attempt_contraction = [&](int k, RootInfo& out) {
    cplx z = seeds[k];
    for (out.iterations = 0; out.iterations < 300; ++out.iterations) {
      const CMat A = z * CMat::Identity(3, 3) - D1_matrix(ctx, z, s, eps);
      Eigen::ComplexEigenSolver<CMat> es(A, false);
      const auto& ev = es.eigenvalues();
      int best = 0;
      for (int i = 1; i < 3; ++i)
        if (std::abs(ev[i] - seeds[k]) < std::abs(ev[best] - seeds[k])) best = i;
      const cplx next = ev[best];
      const bool done = std::abs(next - z) <= 1e-14 * (1.0 + std::abs(z));
      z = next;
      if (done) {
        out.z = z;
        return nearest_seed(z, seeds) == k;
      }
    }
    return false;
  };

  // continuation in eps from the exact eps = 0 roots
  auto attempt_continuation = [&](int k, RootInfo& out) {
    const int steps = 16;
    cplx z = seeds[k];
    int total = 0;
    for (int i = 1; i <= steps; ++i) {
      const double e = eps * i / steps;
      auto fe = [&](cplx w) { return eval_D1(ctx, w, s, e); };
      int it = 0;
      if (!newton(fe, z, max_step / steps, it)) return false;
      total += it;
    }
    out.iterations = total;
    out.z = z;
    return nearest_seed(z, seeds) == k;
  };

  std::array<RootInfo, 3> roots;
  for (int k = 0; k < 3; ++k) {
    RootInfo& r = roots[k];
    if (attempt_newton(k, seeds[k], r))
      r.method = "newton";
    else if (attempt_contraction(k, r)) {
      r.method = "contraction";
      int it = 0;
      cplx z = r.z;
      if (newton(f, z, max_step, it)) r.z = z;
    } else if (attempt_continuation(k, r))
      r.method = "continuation";
    else
      throw RegimeViolation("solve_D1: no root near eta_" + std::to_string(k - 1) + " at s=" + std::to_string(s) +
                            ", eps=" + std::to_string(eps));
    r.residual = std::abs(f(r.z).value);
    r.within_r1 = std::abs(r.z - seeds[k]) <= ctx.regime().r1 * s;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::abs(roots[a].z - roots[b].z) < 1e-6 * (1.0 + s))
        throw RegimeViolation("solve_D1: roots collide at s=" + std::to_string(s) + ", eps=" + std::to_string(eps));
  return roots;
}

// ---------------------------------------------------------------------------
// dense spectrum and branch labels

std::vector<cplx> dense_spectrum(const ModeOperator& mode)
{
  Eigen::ComplexEigenSolver<CMat> es(mode.B, false);
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

double spectral_abscissa(const DispersionContext& ctx, double s, double eps)
{
  const auto ev = dense_spectrum(assemble_B(ctx.op(), s, eps));
  double m = -std::numeric_limits<double>::infinity();
  for (cplx l : ev) m = std::max(m, l.real());
  return m;
}

HydroSpectrum hydrodynamic_spectrum(const DispersionContext& ctx, const ModeOperator& mode)
{
  const double s = mode.s, eps = mode.eps;
  check_regime(ctx, s, eps);
  const VelocityBasis& basis = ctx.basis();
  const int n = basis.dim();
  const Reduction red = reduce_to_1d(mode.xi);
  const ModeOperator canon = assemble_B(ctx.op(), s, eps);
  const Mat G = canon.metric;
  const double strip = -0.5 * ctx.mu();

  // B(s e_1) commutes with v_2 -> -v_2 and v_3 -> -v_3, so it splits into four
  // parity blocks: (even, even) holds j = -1, 0, 1; odd v_2 holds j = 2; odd v_3 holds j = 3
  struct Found {
    cplx lambda;
    CVec e;
  };
  std::array<std::vector<Found>, 4> hydro;
  HydroSpectrum out;
  out.rotation = red.rotation;
  for (int sector = 0; sector < 4; ++sector) {
    std::vector<int> idx;
    for (int a = 0; a < n; ++a) {
      const auto& m = basis.indices()[a];
      if ((m[1] % 2) + 2 * (m[2] % 2) == sector) idx.push_back(a);
    }
    if (idx.empty()) continue;
    CMat sub(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = canon.B(idx[i], idx[j]);
    Eigen::ComplexEigenSolver<CMat> es(sub);
    for (int k = 0; k < static_cast<int>(idx.size()); ++k) {
      const cplx l = es.eigenvalues()[k];
      if (l.real() >= strip) {
        CVec e = CVec::Zero(n);
        for (std::size_t i = 0; i < idx.size(); ++i) e[idx[i]] = es.eigenvectors()(i, k);
        hydro[sector].push_back({l, e});
      } else {
        out.rest.push_back(l);
      }
    }
  }
  const std::array<std::size_t, 4> expected{3, 1, 1, 0};
  for (int sector = 0; sector < 4; ++sector)
    if (hydro[sector].size() != expected[sector])
      throw RegimeViolation("hydrodynamic_spectrum: parity sector " + std::to_string(sector) + " has " +
                            std::to_string(hydro[sector].size()) + " eigenvalues with Re >= -mu/2, expected " +
                            std::to_string(expected[sector]) + " (truncation or regime)");

  auto& acoustic = hydro[0];
  std::sort(acoustic.begin(), acoustic.end(), [](const Found& a, const Found& b) { return a.lambda.imag() < b.lambda.imag(); });
  const std::array<const Found*, 5> picks{&acoustic[0], &acoustic[1], &acoustic[2], &hydro[1][0], &hydro[2][0]};

  const Mat U = pushforward(basis, red.rotation);
  for (int slot = 0; slot < 5; ++slot) {
    const int j = slot - 1;
    BranchPoint& bp = out.branches[slot];
    bp.branch = j;
    bp.s = s;
    bp.eps = eps;
    bp.lambda = picks[slot]->lambda;
    CVec e = picks[slot]->e;
    e /= std::sqrt(weighted_bilinear(e, e, s));
    const CVec gj = ctx.coeffs().g(basis, j, s);
    if ((e.transpose() * G.cast<cplx>() * gj)(0, 0).real() < 0) e = -e;
    bp.psi = U.cast<cplx>() * e;
    if (j >= 2) {
      bp.z = bp.lambda;
      bp.det_residual = std::abs(eval_D0(ctx, bp.z, eps * s).value);
    } else {
      bp.z = bp.lambda / eps;
      bp.det_residual = std::abs(eval_D1(ctx, bp.z, s, eps).value);
    }
    bp.eig_residual = weighted_norm(CVec(mode.B * bp.psi - bp.lambda * bp.psi), s);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (cplx l : out.rest) top = std::max(top, l.real());
  out.gap_alpha = -top;
  return out;
}

// ---------------------------------------------------------------------------

ExpansionReport eigenfunction_expansion_check(const DispersionContext& ctx, int branch, double s,
                                              const std::vector<double>& eps_list)
{
  const VelocityBasis& basis = ctx.basis();
  const CollisionOperator& op = ctx.op();
  ExpansionReport rep;
  rep.branch = branch;
  rep.s = s;
  const CVec g = ctx.coeffs().g(basis, branch, s);
  const Vec v1g = basis.mult(0) * g.real();
  const Vec lead = op.solve_Linv(Vec(basis.P1() * v1g));
  const int dir = branch >= 2 ? branch : 1;
  for (double eps : eps_list) {
    const HydroSpectrum hs = hydrodynamic_spectrum(ctx, assemble_B(op, s, eps));
    const CVec& e = hs.branch(branch).psi;
    const CVec P0e = basis.P0().cast<cplx>() * e;
    const CVec P1e = e - P0e;
    rep.eps.push_back(eps);
    rep.macro_residual.push_back(weighted_norm(CVec(P0e - g), s));
    rep.micro_residual.push_back(weighted_norm(CVec(P1e - (kI * eps * s) * lead.cast<cplx>()), s));
    const cplx a = basis.chi(0).cast<cplx>().dot(P0e), b = basis.chi(dir).cast<cplx>().dot(P0e),
               c = basis.chi(4).cast<cplx>().dot(P0e);
    rep.normalization.push_back(std::abs(a * a * (1.0 + 1.0 / (s * s)) + b * b + c * c));
  }
  if (eps_list.size() >= 2) {
    rep.macro_slope = loglog_fit(rep.eps, rep.macro_residual).slope;
    rep.micro_slope = loglog_fit(rep.eps, rep.micro_residual).slope;
  }
  return rep;
}

}  // namespace vpb
