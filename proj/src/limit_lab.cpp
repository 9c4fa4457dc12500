#include "vpb/limit_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "vpb/parallel.hpp"
#include "vpb/quadrature.hpp"

namespace vpb {

std::string to_string(Spacing s)
{
  switch (s) {
    case Spacing::gauss: return "gauss";
    case Spacing::linear: return "linear";
    case Spacing::geometric: return "geometric";
  }
  return "?";
}

Spacing spacing_from_string(const std::string& s)
{
  if (s == "gauss") return Spacing::gauss;
  if (s == "linear") return Spacing::linear;
  if (s == "geometric") return Spacing::geometric;
  throw DomainError("unknown s-grid spacing '" + s + "' (expected gauss, linear or geometric)");
}

std::string to_string(DataKind k) { return k == DataKind::generic ? "generic" : "well_prepared"; }

SGrid SGrid::make(double s_min, double s_max, int count, Spacing spacing)
{
  if (!(s_min > 0.0)) throw DomainError("s-grid: smallest |xi| must be positive (xi = 0 has no mode operator)");
  if (!(s_max > s_min)) throw DomainError("s-grid: s_max must exceed s_min");
  if (count < 2) throw DomainError("s-grid: at least two shells required");
  SGrid g;
  if (spacing == Spacing::gauss) {
    const Rule1D r = gauss_legendre(count, s_min, s_max);
    g.s = r.nodes;
    g.w = r.weights;
    return g;
  }
  g.s.resize(count);
  for (int k = 0; k < count; ++k) {
    const double x = static_cast<double>(k) / (count - 1);
    g.s[k] = spacing == Spacing::linear ? s_min + x * (s_max - s_min) : s_min * std::pow(s_max / s_min, x);
  }
  // trapezoid on the (possibly uneven) nodes
  g.w.assign(count, 0.0);
  for (int k = 0; k + 1 < count; ++k) {
    const double h = g.s[k + 1] - g.s[k];
    g.w[k] += h / 2;
    g.w[k + 1] += h / 2;
  }
  return g;
}

InitialDataSpec InitialDataSpec::generic()
{
  InitialDataSpec d;
  d.kind = DataKind::generic;
  d.shape.n = 0.5;
  d.shape.m = CVec3(0.6, 0.5, 0.2);
  d.shape.q = 0.4;
  d.micro_amplitude = 0.3;
  return d;
}

InitialDataSpec InitialDataSpec::well_prepared()
{
  InitialDataSpec d;
  d.kind = DataKind::well_prepared;
  d.shape.m = CVec3(0.0, 1.0, 0.3);
  d.shape.q = 1.0;
  return d;
}

InitialDataSpec InitialDataSpec::pd_free()
{
  InitialDataSpec d;
  d.kind = DataKind::generic;
  d.shape.m = CVec3(0.6, 0.5, 0.2);
  d.shape.q = 0.4;
  return d;
}

InitialData make_initial_data(const InitialDataSpec& spec, const VelocityBasis& basis, const SGrid& grid)
{
  if (!spec.profile) throw DomainError("initial data: missing profile");
  if (spec.kind == DataKind::well_prepared && spec.micro_amplitude != 0.0)
    throw DomainError("initial data: well-prepared data has no micro part");
  InitialData d;
  d.kind = spec.kind;
  d.grid = grid;
  const int i110 = basis.index_of({1, 1, 0});
  const int i300 = basis.index_of({3, 0, 0});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double s = grid.s[k];
    const Vec3 xi(s, 0.0, 0.0);
    const double g = spec.profile(s);
    MacroState u;
    u.n = g * spec.shape.n;
    u.m = g * spec.shape.m;
    u.q = g * spec.shape.q;
    if (spec.kind == DataKind::well_prepared) {
      const double scale = std::max({std::abs(u.n), u.m.norm(), std::abs(u.q), 1e-300});
      if (constraint_residual(u, xi) > 1e-12 * scale) {
        if (!spec.auto_correct) {
          std::ostringstream os;
          os << "initial data: shell s = " << s << " violates div m = 0 or the Poisson relation";
          throw DomainError(os.str());
        }
        u = compatible_initial_values(u, xi);
      }
    }
    u.phi_factor = u.n / (s * s);
    CVec f = reconstruct_macro(basis, u);
    if (spec.micro_amplitude != 0.0) {
      if (i110 >= 0) f[i110] += spec.micro_amplitude * g;
      if (i300 >= 0) f[i300] += 0.5 * spec.micro_amplitude * g;
    }
    d.f0.push_back(std::move(f));
    d.macro.push_back(u);
  }
  return d;
}

double synth_norm_LinfP(const SGrid& grid, const std::vector<CVec>& field)
{
  if (field.size() != grid.size()) throw DomainError("synth_norm: field and grid differ in length");
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    acc += grid.s[k] * grid.s[k] * grid.w[k] * weighted_norm(field[k], grid.s[k]);
  return 4.0 * kPi * acc;
}

double synth_norm_L2P(const SGrid& grid, const std::vector<CVec>& field)
{
  if (field.size() != grid.size()) throw DomainError("synth_norm: field and grid differ in length");
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double n = weighted_norm(field[k], grid.s[k]);
    acc += grid.s[k] * grid.s[k] * grid.w[k] * n * n;
  }
  return std::sqrt(4.0 * kPi * acc);
}

RefinementCheck norm_refinement(const std::function<CVec(double)>& field, double s_min, double s_max, int count,
                                Spacing spacing)
{
  auto eval = [&](int n) {
    const SGrid g = SGrid::make(s_min, s_max, n, spacing);
    std::vector<CVec> f;
    for (double s : g.s) f.push_back(field(s));
    return synth_norm_LinfP(g, f);
  };
  RefinementCheck r;
  r.coarse = eval(count);
  r.fine = eval(2 * count);
  r.rel_change = std::abs(r.fine - r.coarse) / std::max(std::abs(r.fine), 1e-300);
  r.warning = r.rel_change > 0.05;
  return r;
}

std::vector<CVec> oscillation_part(const DispersionContext& ctx, const InitialData& data, double t, double eps)
{
  const VelocityBasis& basis = ctx.basis();
  const Mat& P0 = basis.P0();
  std::vector<CVec> out;
  for (std::size_t k = 0; k < data.grid.size(); ++k) {
    const double s = data.grid.s[k];
    const Vec3 xi(s, 0.0, 0.0);
    const CVec p0 = P0 * data.f0[k];
    CVec u = CVec::Zero(basis.dim());
    for (int j : {-1, 1}) {
      const CVec h = ctx.coeffs().h(basis, j, xi);
      const cplx ph = std::exp((AsymptoticCoefficients::eta(j, s) / eps - ctx.coeffs().b(j, s)) * t);
      u += ph * weighted_inner(p0, h, s) * h;
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<double> make_time_grid(double eps_min, double t_min, double t_max, int geometric, int layer)
{
  if (!(t_min > 0.0 && t_max > t_min)) throw DomainError("time grid: need 0 < t_min < t_max");
  if (geometric < 2) throw DomainError("time grid: at least two geometric points");
  std::vector<double> t{0.0};
  for (int k = 0; k < geometric; ++k)
    t.push_back(t_min * std::pow(t_max / t_min, static_cast<double>(k) / (geometric - 1)));
  for (int k = 1; k <= layer; ++k) t.push_back(10.0 * eps_min * k / layer);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

namespace {

// e^{(t/eps^2) B} on one shell; falls back to the Radau integrator when the
// eigenvector matrix is badly conditioned
std::vector<CVec> kinetic_series(const ModeOperator& mode, const CVec& f0, const std::vector<double>& times)
{
  const KineticPropagator prop(mode);
  std::vector<CVec> out;
  if (prop.ok()) {
    for (double t : times) out.push_back(t == 0.0 ? f0 : prop.apply(f0, t));
    return out;
  }
  LinearRadau rad(mode.B / (mode.eps * mode.eps));
  CVec y = f0;
  double t0 = 0.0;
  for (double t : times) {
    y = rad.advance(y, t0, t);
    t0 = t;
    out.push_back(y);
  }
  return out;
}

void check_eps_list(const std::vector<double>& eps)
{
  if (eps.size() < 3) throw DomainError("convergence study: at least three eps values needed for a slope fit");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) throw DomainError("convergence study: eps must lie in (0,1)");
}

}  // namespace

ErrorTable run_convergence_study(const DispersionContext& ctx, const InitialData& data,
                                 const std::vector<double>& eps_list, const std::vector<double>& times, int jobs)
{
  check_eps_list(eps_list);
  if (times.empty() || times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
    throw DomainError("convergence study: times must be sorted and non-negative");
  const VelocityBasis& basis = ctx.basis();
  const Mat& P0 = basis.P0();
  const Mat& P1 = basis.P1();
  const std::size_t ns = data.grid.size(), nt = times.size(), ne = eps_list.size();

  // per (eps, shell, time): shell norms of the four differences
  struct Slot {
    std::vector<std::array<double, 4>> v;
  };
  std::vector<Slot> slots(ne * ns);
  parallel_for(static_cast<int>(ne * ns), jobs, [&](int idx) {
    const std::size_t ie = idx / ns, k = idx % ns;
    const double eps = eps_list[ie], s = data.grid.s[k];
    const Vec3 xi(s, 0.0, 0.0);
    const ModeOperator mode = assemble_B(ctx.op(), s, eps);
    const CVec& f0 = data.f0[k];
    const CVec p0 = P0 * f0, p1 = P1 * f0;
    const std::vector<CVec> f = kinetic_series(mode, f0, times);
    const std::vector<CVec> f1 = kinetic_series(mode, p1, times);
    std::array<CVec, 5> h;
    std::array<cplx, 5> a;
    for (int j = -1; j <= 3; ++j) {
      h[j + 1] = ctx.coeffs().h(basis, j, xi);
      a[j + 1] = weighted_inner(p0, h[j + 1], s);
    }
    Slot& sl = slots[idx];
    for (std::size_t it = 0; it < nt; ++it) {
      const double t = times[it];
      CVec u = CVec::Zero(basis.dim()), osc = CVec::Zero(basis.dim());
      for (int j : {0, 2, 3}) u += std::exp(-ctx.coeffs().b(j, s) * t) * a[j + 1] * h[j + 1];
      for (int j : {-1, 1})
        osc += std::exp((AsymptoticCoefficients::eta(j, s) / eps - ctx.coeffs().b(j, s)) * t) * a[j + 1] * h[j + 1];
      const CVec d = f[it] - u;
      sl.v.push_back({weighted_norm(d, s), weighted_norm(CVec(P0 * d), s), weighted_norm(CVec(P1 * f[it]), s),
                      weighted_norm(CVec(d - osc - f1[it]), s)});
    }
  });

  ErrorTable tab;
  tab.s = data.grid.s;
  tab.w = data.grid.w;
  tab.basis_hash = basis.hash();
  tab.backend = to_string(ctx.op().backend());
  tab.kind = data.kind;
  for (std::size_t ie = 0; ie < ne; ++ie)
    for (std::size_t it = 0; it < nt; ++it) {
      std::array<double, 4> acc{};
      for (std::size_t k = 0; k < ns; ++k) {
        const double wk = data.grid.s[k] * data.grid.s[k] * data.grid.w[k];
        for (int q = 0; q < 4; ++q) acc[q] += wk * slots[ie * ns + k].v[it][q];
      }
      ErrorRow r;
      r.eps = eps_list[ie];
      r.t = times[it];
      r.err_LinfP = 4.0 * kPi * acc[0];
      r.err_macro = 4.0 * kPi * acc[1];
      r.err_micro = 4.0 * kPi * acc[2];
      r.err_osc = 4.0 * kPi * acc[3];
      tab.rows.push_back(r);
    }
  return tab;
}

std::string ErrorTable::csv() const
{
  std::string out = "eps,t,err_Linf_P,err_macro,err_micro,err_osc\n";
  char buf[256];
  for (const ErrorRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.12e,%.12e,%.12e,%.12e,%.12e\n", r.eps, r.t, r.err_LinfP, r.err_macro,
                  r.err_micro, r.err_osc);
    out += buf;
  }
  return out;
}

ConvergenceSummary summarize(const ErrorTable& table)
{
  ConvergenceSummary c;
  for (const ErrorRow& r : table.rows) {
    if (c.eps.empty() || c.eps.back() != r.eps) {
      c.eps.push_back(r.eps);
      c.sup_weighted.push_back(0.0);
      c.sup_weighted_osc.push_back(0.0);
      c.err_t0.push_back(r.err_LinfP);
    }
    c.sup_weighted.back() = std::max(c.sup_weighted.back(), std::pow(1.0 + r.t, 0.75) * r.err_LinfP);
    c.sup_weighted_osc.back() = std::max(c.sup_weighted_osc.back(), std::sqrt(1.0 + r.t) * r.err_osc);
  }
  check_eps_list(c.eps);
  c.slope = loglog_fit(c.eps, c.sup_weighted).slope;
  c.slope_osc = loglog_fit(c.eps, c.sup_weighted_osc).slope;
  return c;
}

FrequencyEstimate layer_frequency(const DispersionContext& ctx, const CVec& f0, double s, double eps)
{
  const ModeOperator mode = assemble_B(ctx.op(), s, eps);
  // sampling fast enough for any acoustic speed up to 1 + 1.3 s, ~40 periods long
  const int N = 1024;
  const double dt = eps / (4.0 * (1.0 + s));
  const double t0 = 20.0 * eps * eps;
  std::vector<double> times(N);
  for (int k = 0; k < N; ++k) times[k] = t0 + k * dt;
  const std::vector<CVec> f = kinetic_series(mode, f0, times);
  std::vector<cplx> x(N);
  cplx mean = 0.0;
  for (int k = 0; k < N; ++k) mean += (x[k] = f[k][0]);
  mean /= double(N);
  for (int k = 0; k < N; ++k) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * k / (N - 1));
    x[k] = (x[k] - mean) * hann;
  }
  auto mag = [&](double w) {
    cplx acc = 0.0;
    for (int k = 0; k < N; ++k) acc += x[k] * std::exp(-kI * w * (k * dt));
    return std::abs(acc);
  };
  const double T = N * dt;
  const double step = kPi / (2.0 * T);
  const double wmax = kPi / dt;
  double best = 0.0, wbest = 0.0;
  for (double w = 8.0 * kPi / T; w < wmax; w += step) {
    const double m = mag(w);
    if (m > best) {
      best = m;
      wbest = w;
    }
  }
  const auto r = boost::math::tools::brent_find_minima([&](double w) { return -mag(w); }, wbest - step,
                                                       wbest + step, 40);
  FrequencyEstimate e;
  e.measured = r.first;
  e.predicted = std::abs(AsymptoticCoefficients::eta(1, s)) / eps;
  e.rel_err = std::abs(e.measured - e.predicted) / e.predicted;
  return e;
}

DecayStudy decay_study(const DispersionContext& ctx, const InitialData& data, double eps_macro,
                       const std::vector<double>& macro_times, const std::vector<double>& eps_list, double t_probe,
                       int jobs)
{
  const Mat& P0 = ctx.basis().P0();
  const Mat& P1 = ctx.basis().P1();
  const std::size_t ns = data.grid.size();
  DecayStudy out;

  std::vector<std::vector<CVec>> macro(ns);
  parallel_for(static_cast<int>(ns), jobs, [&](int k) {
    const ModeOperator mode = assemble_B(ctx.op(), data.grid.s[k], eps_macro);
    for (const CVec& f : kinetic_series(mode, data.f0[k], macro_times)) macro[k].push_back(P0 * f);
  });
  std::vector<double> y;
  for (std::size_t it = 0; it < macro_times.size(); ++it) {
    std::vector<CVec> field;
    for (std::size_t k = 0; k < ns; ++k) field.push_back(macro[k][it]);
    y.push_back(synth_norm_L2P(data.grid, field));
  }
  out.macro_fit = fit_decay(macro_times, y, DecayModel::poly);

  check_eps_list(eps_list);
  std::vector<CVec> micro(eps_list.size() * ns);
  parallel_for(static_cast<int>(micro.size()), jobs, [&](int idx) {
    const std::size_t ie = idx / ns, k = idx % ns;
    const ModeOperator mode = assemble_B(ctx.op(), data.grid.s[k], eps_list[ie]);
    micro[idx] = P1 * kinetic_series(mode, data.f0[k], {t_probe}).front();
  });
  out.eps = eps_list;
  for (std::size_t ie = 0; ie < eps_list.size(); ++ie)
    out.micro.push_back(synth_norm_L2P(
        data.grid, std::vector<CVec>(micro.begin() + ie * ns, micro.begin() + (ie + 1) * ns)));
  out.micro_slope = loglog_fit(out.eps, out.micro).slope;
  return out;
}

HilbertReport hilbert_expansion_check(const DispersionContext& ctx, const MacroState& u0, const Vec3& xi)
{
  const double s = xi.norm();
  if (!(s > 0.0)) throw DomainError("hilbert_expansion_check: xi = 0");
  const VelocityBasis& basis = ctx.basis();
  const CollisionOperator& op = ctx.op();
  HilbertReport rep;
  rep.kappa0 = -ctx.coeffs().A22;
  rep.kappa1 = -ctx.coeffs().A44;
  rep.constraint_residual = constraint_residual(u0, xi);

  // P1 f1 = L^{-1} P1 (i v.xi f0); the order-eps fluxes (i v.xi P1 f1, .) close the
  // momentum and energy balances with -kappa0 |xi|^2 m_perp and -kappa1 |xi|^2 q
  const CVec f0 = reconstruct_macro(basis, u0);
  const CMat Vxi = basis.mult_along(xi).cast<cplx>();
  const CVec P1f1 = op.solve_Linv_c(basis.P1().cast<cplx>() * (kI * (Vxi * f0)), 1e-12);
  const CVec flux = kI * (Vxi * P1f1);
  const Mat& chi = basis.invariants();

  const Vec3 d = xi / s;
  const CVec3 mperp = u0.m - d.cast<cplx>() * d.cast<cplx>().dot(u0.m);
  std::ostringstream note;
  if (mperp.norm() > 1e-12) {
    CVec mv = CVec::Zero(basis.dim());
    for (int k = 0; k < 3; ++k) mv += mperp[k] * chi.col(k + 1).cast<cplx>();
    rep.kappa0_extracted = (mv.dot(flux) / mperp.squaredNorm()).real() / (s * s);
  } else {
    rep.kappa0_extracted = std::nan("");
    note << "no transverse momentum in the data; ";
  }
  if (std::abs(u0.q) > 1e-12)
    rep.kappa1_extracted = (chi.col(4).cast<cplx>().dot(flux) / u0.q).real() / (s * s);
  else {
    rep.kappa1_extracted = std::nan("");
    note << "no temperature in the data; ";
  }

  if (op.kernel().genuine()) {
    const Vec fr = f0.real();
    const Vec g = apply_gamma(op, fr, fr);
    rep.gamma_norm = g.norm();
    rep.gamma_macro = (basis.P0() * g).norm();
    note << "Gamma(f0,f0) kept at the single mode triple (xi, xi, 2 xi); other convolution terms dropped";
  } else {
    note << "synthetic backend has no Gamma";
  }
  rep.note = note.str();
  return rep;
}

}  // namespace vpb
