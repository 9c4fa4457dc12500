#include "vpb/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace vpb {

namespace {

void check_times(const std::vector<double>& times)
{
  if (times.empty()) throw DomainError("empty time list");
  if (times.front() < 0.0) throw DomainError("times must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] >= times[i - 1])) throw DomainError("times must be sorted");
}

// weights of int_0^D e^{-b(D-tau)} (H_k (1 - tau/D) + H_{k+1} tau/D) dtau
std::pair<double, double> duhamel_weights(double b, double D)
{
  const double x = b * D;
  double phi1, phi2;  // (1 - e^{-x})/x and (x - 1 + e^{-x})/x^2
  if (std::abs(x) < 1e-3) {
    phi1 = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    phi2 = 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
  } else {
    phi1 = -std::expm1(-x) / x;
    phi2 = (x + std::expm1(-x)) / (x * x);
  }
  return {D * (phi1 - phi2), D * phi2};
}

CVec forcing_vector(const VelocityBasis& basis, const CVec3& H1, cplx H2)
{
  const Mat& chi = basis.invariants();
  CVec h = H2 * chi.col(4).cast<cplx>();
  for (int k = 0; k < 3; ++k) h += H1[k] * chi.col(k + 1).cast<cplx>();
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// kinetic flow

KineticPropagator::KineticPropagator(const ModeOperator& mode, double cond_limit) : mode_(mode)
{
  Eigen::ComplexEigenSolver<CMat> es(mode.B);
  if (es.info() != Eigen::Success) return;
  lambda_ = es.eigenvalues();
  V_ = es.eigenvectors();
  for (int k = 0; k < V_.cols(); ++k) V_.col(k).normalize();
  const Vec sv = Eigen::JacobiSVD<CMat>(V_).singularValues();
  cond_ = sv(0) / sv(sv.size() - 1);
  Vlu_.compute(V_);
  ok_ = std::isfinite(cond_) && cond_ <= cond_limit;
}

CVec KineticPropagator::apply(const CVec& f0, double t) const
{
  if (!ok_) throw SolverFailure("KineticPropagator: eigendecomposition rejected (condition " + std::to_string(cond_) + ")");
  CVec c = Vlu_.solve(f0);
  const double scale = t / (mode_.eps * mode_.eps);
  for (int k = 0; k < c.size(); ++k) c[k] *= std::exp(scale * lambda_[k]);
  return V_ * c;
}

ModeTrajectory propagate_kinetic(const ModeOperator& mode, const CVec& f0, const std::vector<double>& times,
                                 const KineticOptions& opt)
{
  check_times(times);
  if (f0.size() != mode.B.rows()) throw DomainError("propagate_kinetic: length mismatch");
  ModeTrajectory tr;
  tr.xi = mode.xi;
  tr.eps = mode.eps;
  tr.times = times;
  const KineticPropagator prop(mode, opt.cond_limit);
  tr.eig_condition = prop.condition();
  tr.eig_path = prop.ok();

  std::vector<CVec> ode;
  if (opt.oracle || !prop.ok()) {
    LinearRadau rad(mode.B / (mode.eps * mode.eps), opt.tol);
    CVec y = f0;
    double t = 0.0;
    for (double ti : times) {
      y = rad.advance(y, t, ti);
      t = ti;
      ode.push_back(y);
    }
  }
  if (prop.ok()) {
    for (double t : times) tr.states.push_back(t == 0.0 ? f0 : prop.apply(f0, t));
  } else {
    tr.states = ode;
    tr.note = "eigendecomposition ill-conditioned, ODE path only";
  }
  for (const CVec& f : tr.states) tr.norm_track.push_back(weighted_norm(f, mode.s));
  if (!ode.empty() && prop.ok()) {
    tr.oracle_max_diff = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      tr.oracle_max_diff = std::max(tr.oracle_max_diff, weighted_norm(CVec(tr.states[i] - ode[i]), mode.s));
    tr.oracle_states = std::move(ode);
  }
  return tr;
}

// ---------------------------------------------------------------------------
// hydrodynamic projection

SpectralProjector spectral_projector(const HydroSpectrum& hs, const ModeOperator& mode)
{
  SpectralProjector p;
  p.xi = mode.xi;
  p.eps = mode.eps;
  const CMat G = mode.metric.cast<cplx>();
  const int n = static_cast<int>(mode.B.rows());
  p.P = CMat::Zero(n, n);
  for (const BranchPoint& bp : hs.branches) p.P += bp.psi * (bp.psi.transpose() * G);
  return p;
}

double SpectralProjector::idempotency_residual() const { return (P * P - P).norm() / std::max(1.0, P.norm()); }

int SpectralProjector::rank(double tol) const
{
  const Vec sv = Eigen::JacobiSVD<CMat>(P).singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++r;
  return r;
}

std::vector<SplitPart> split_S1_S2(const DispersionContext& ctx, const ModeOperator& mode, const CVec& f0,
                                   const std::vector<double>& times)
{
  check_times(times);
  const KineticPropagator prop(mode);
  const bool hydro = mode.eps * mode.s <= ctx.regime().r0;
  HydroSpectrum hs;
  std::array<cplx, 5> coef{};
  if (hydro) {
    hs = hydrodynamic_spectrum(ctx, mode);
    for (int j = 0; j < 5; ++j) coef[j] = weighted_bilinear(f0, hs.branches[j].psi, mode.s);
  }
  std::vector<SplitPart> out;
  for (double t : times) {
    SplitPart sp;
    sp.t = t;
    const CVec full = t == 0.0 ? f0 : prop.apply(f0, t);
    sp.s1 = CVec::Zero(f0.size());
    if (hydro)
      for (int j = 0; j < 5; ++j)
        sp.s1 += std::exp(t / (mode.eps * mode.eps) * hs.branches[j].lambda) * coef[j] * hs.branches[j].psi;
    sp.s2 = full - sp.s1;
    out.push_back(std::move(sp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// fluid semigroup

FluidModeState fluid_state(const VelocityBasis& basis, const CVec& U, const Vec3& xi, const CVec3& H1)
{
  const double s2 = xi.squaredNorm();
  const CVec c = basis.invariants().transpose().cast<cplx>() * U;
  FluidModeState st;
  st.n_hat = c[0];
  st.m_hat = CVec3(c[1], c[2], c[3]);
  st.q_hat = c[4];
  st.phi_hat = -st.n_hat / s2;
  st.p_hat = -kI * (xi.cast<cplx>().dot(H1)) / s2;
  return st;
}

ModeTrajectory fluid_semigroup_V(const DispersionContext& ctx, const MacroState& u0, const Vec3& xi,
                                 const std::vector<double>& times)
{
  check_times(times);
  const VelocityBasis& basis = ctx.basis();
  const double s = xi.norm();
  if (!(s > 0)) throw DomainError("fluid_semigroup_V: xi = 0");
  const CVec U0 = reconstruct_macro(basis, u0);
  ModeTrajectory tr;
  tr.xi = xi;
  tr.times = times;
  std::array<CVec, 3> h;
  std::array<cplx, 3> a;
  std::array<double, 3> b;
  const std::array<int, 3> js{0, 2, 3};
  for (int k = 0; k < 3; ++k) {
    h[k] = ctx.coeffs().h(basis, js[k], xi);
    a[k] = weighted_inner(U0, h[k], s);
    b[k] = ctx.coeffs().b(js[k], s);
  }
  for (double t : times) {
    CVec U = CVec::Zero(basis.dim());
    for (int k = 0; k < 3; ++k) U += std::exp(-b[k] * t) * a[k] * h[k];
    tr.norm_track.push_back(weighted_norm(U, s));
    tr.fluid.push_back(fluid_state(basis, U, xi));
    tr.states.push_back(std::move(U));
  }
  return tr;
}

CVec fluid_semigroup_closed_form(const DispersionContext& ctx, const MacroState& u0, const Vec3& xi, double t)
{
  const VelocityBasis& basis = ctx.basis();
  const Mat& chi = basis.invariants();
  const double s = xi.norm(), s2 = s * s;
  const Vec3 d = xi / s;
  const cplx X = u0.q - kSqrt23 * u0.n;
  const Vec R0 = -std::sqrt(6.0) * s2 / (3.0 + 5.0 * s2) * chi.col(0) + 3.0 * (1.0 + s2) / (3.0 + 5.0 * s2) * chi.col(4);
  const CVec3 mt = u0.m - d.cast<cplx>() * d.cast<cplx>().dot(u0.m);
  CVec out = std::exp(-ctx.coeffs().b(0, s) * t) * X * R0.cast<cplx>();
  const double e2 = std::exp(-ctx.coeffs().b(2, s) * t);
  for (int k = 0; k < 3; ++k) out += e2 * mt[k] * chi.col(k + 1).cast<cplx>();
  return out;
}

// ---------------------------------------------------------------------------
// NSPF modes

MacroState compatible_initial_values(const MacroState& u0, const Vec3& xi)
{
  const double s2 = xi.squaredNorm();
  if (!(s2 > 0)) throw DomainError("compatible_initial_values: xi = 0");
  const Vec3 d = xi / std::sqrt(s2);
  const cplx X = u0.q - kSqrt23 * u0.n;
  MacroState u;
  u.m = u0.m - d.cast<cplx>() * d.cast<cplx>().dot(u0.m);
  u.n = -std::sqrt(6.0) * s2 / (3.0 + 5.0 * s2) * X;
  u.q = (3.0 + 3.0 * s2) / (3.0 + 5.0 * s2) * X;
  u.phi_factor = u.n / s2;
  return u;
}

double constraint_residual(const MacroState& u, const Vec3& xi)
{
  const double s2 = xi.squaredNorm();
  return std::max(std::abs(xi.cast<cplx>().dot(u.m)), std::abs(u.n + u.n / s2 + kSqrt23 * u.q));
}

double constraint_residual(const FluidModeState& u, const Vec3& xi)
{
  MacroState m;
  m.n = u.n_hat;
  m.m = u.m_hat;
  m.q = u.q_hat;
  return constraint_residual(m, xi);
}

namespace {

void check_forcing(std::size_t nt, const std::vector<CVec3>& H1, const std::vector<cplx>& H2)
{
  if (H1.size() != nt || H2.size() != nt) throw DomainError("nspf: forcing must be sampled on the time list");
}

void check_compatible(const MacroState& u0, const Vec3& xi, double tol)
{
  const double scale = std::max({1.0, std::abs(u0.n), u0.m.norm(), std::abs(u0.q)});
  if (constraint_residual(u0, xi) <= tol * scale) return;
  const MacroState fix = compatible_initial_values(u0, xi);
  std::ostringstream os;
  os.precision(17);
  os << "nspf: initial data violates the incompressibility/Poisson constraints (residual "
     << constraint_residual(u0, xi) << "); compatible values: n(0)=" << fix.n << ", q(0)=" << fix.q << ", m(0)=("
     << fix.m[0] << "," << fix.m[1] << "," << fix.m[2] << ")";
  throw DomainError(os.str());
}

}  // namespace

std::vector<FluidModeState> nspf_mode_solve(const DispersionContext& ctx, const MacroState& u0,
                                            const std::vector<CVec3>& H1, const std::vector<cplx>& H2,
                                            const Vec3& xi, const std::vector<double>& times, double constraint_tol)
{
  check_times(times);
  check_forcing(times.size(), H1, H2);
  check_compatible(u0, xi, constraint_tol);
  const VelocityBasis& basis = ctx.basis();
  const double s = xi.norm();
  const std::array<int, 3> js{0, 2, 3};
  std::array<CVec, 3> h;
  std::array<double, 3> b;
  std::array<cplx, 3> a;
  const CVec U0 = reconstruct_macro(basis, u0);
  for (int k = 0; k < 3; ++k) {
    h[k] = ctx.coeffs().h(basis, js[k], xi);
    b[k] = ctx.coeffs().b(js[k], s);
    a[k] = weighted_inner(U0, h[k], s);
  }
  auto proj = [&](std::size_t i, int k) { return weighted_inner(forcing_vector(basis, H1[i], H2[i]), h[k], s); };

  std::vector<FluidModeState> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      const double D = times[i] - times[i - 1];
      for (int k = 0; k < 3; ++k) {
        const auto [w1, w2] = duhamel_weights(b[k], D);
        a[k] = std::exp(-b[k] * D) * a[k] + w1 * proj(i - 1, k) + w2 * proj(i, k);
      }
    }
    CVec U = CVec::Zero(basis.dim());
    for (int k = 0; k < 3; ++k) U += a[k] * h[k];
    out.push_back(fluid_state(basis, U, xi, H1[i]));
  }
  return out;
}

std::vector<FluidModeState> nspf_mode_ode(const DispersionContext& ctx, const MacroState& u0,
                                          const std::vector<CVec3>& H1, const std::vector<cplx>& H2,
                                          const Vec3& xi, const std::vector<double>& times, OdeTolerance tol)
{
  check_times(times);
  check_forcing(times.size(), H1, H2);
  const double s2 = xi.squaredNorm();
  const double kappa0 = -ctx.coeffs().A22, kappa1 = -ctx.coeffs().A44;
  const double c = (3.0 + 3.0 * s2) / (3.0 + 5.0 * s2);
  const CVec3 xc = xi.cast<cplx>();

  auto state_at = [&](const CVec& y, std::size_t i) {
    FluidModeState st;
    st.q_hat = y[0];
    st.m_hat = y.tail(3);
    st.n_hat = -kSqrt23 * s2 / (1.0 + s2) * st.q_hat;
    st.phi_hat = -st.n_hat / s2;
    st.p_hat = -kI * xc.dot(H1[i]) / s2;
    return st;
  };
  // (3+5s^2)/(3+3s^2) q' + kappa1 s^2 q = H2 and m' + kappa0 s^2 m + i xi p = H1
  CVec y(4);
  y[0] = u0.q;
  y.tail(3) = u0.m;
  std::vector<FluidModeState> out{state_at(y, 0)};
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double t0 = times[i - 1], t1 = times[i];
    auto f = [&](double t, const CVec& v) {
      const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
      const cplx h2 = (1.0 - w) * H2[i - 1] + w * H2[i];
      const CVec3 h1 = (1.0 - w) * H1[i - 1] + w * H1[i];
      const cplx p = -kI * xc.dot(h1) / s2;
      CVec d(4);
      d[0] = c * (h2 - kappa1 * s2 * v[0]);
      d.tail(3) = h1 - kappa0 * s2 * v.tail(3) - kI * xc * p;
      return d;
    };
    y = dopri5(f, y, t0, t1, tol);
    out.push_back(state_at(y, i));
  }
  return out;
}

}  // namespace vpb
