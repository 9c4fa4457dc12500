// Acceptance run: one PASS/FAIL line per criterion. Usage: vpbkit_acceptance [criterion ...]
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "vpb/cli.hpp"
#include "vpb/collision_cache.hpp"
#include "vpb/limit_lab.hpp"
#include "vpb/transport.hpp"

using namespace vpb;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kOrthoTol = 1e-10;
constexpr double kSymTol = 1e-10;
constexpr double kSyntheticSeconds = 60.0;
constexpr double kHardSphereSeconds = 30.0 * 60.0;
constexpr double kRootTol = 1e-8;
constexpr double kSlope3 = 3.0, kSlope3Tol = 0.2;
constexpr double kB2Tol = 1e-3;
constexpr double kIsoTol = 1e-10;
constexpr double kS2Slope = 0.9, kS2R2 = 0.99;
constexpr double kMacroRate = 0.75, kMacroRateTol = 0.10;
constexpr double kMicroSlope = 1.0, kMicroSlopeTol = 0.1;
constexpr double kLimitSlope = 1.0, kLimitSlopeTol = 0.15;
constexpr double kLimitSeconds = 600.0;
constexpr double kFreqTol = 0.05;
constexpr double kOdeTol = 1e-8, kAlgebraTol = 1e-12, kConstraintTol = 1e-12;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir()
{
  const fs::path p = fs::temp_directory_path() / "vpbkit-acceptance";
  fs::create_directories(p);
  return p;
}

const CollisionOperator& hard_sphere6()
{
  static const CollisionOperator op =
      assemble_L(std::make_shared<const VelocityBasis>(6, 16), KernelSpec::hard_sphere());
  return op;
}

const DispersionContext& hs_ctx()
{
  static const DispersionContext c(hard_sphere6());
  return c;
}

// ---------------------------------------------------------------------------

Result structure_suite()
{
  std::ostringstream d;
  bool ok = true;
  auto one = [&](const char* name, const CollisionOperator& op, double secs, double limit) {
    const VelocityBasis& b = op.basis();
    const double ortho = (b.gram() - Mat::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff();
    const StructureReport& st = op.structure();
    const bool p = ortho <= kOrthoTol && st.symmetry_residual <= kSymTol && st.near_null_count == 5 &&
                   st.mu_estimate > 0.0 && secs < limit;
    ok = ok && p;
    d << name << ": ortho " << fmt("%.1e", ortho) << ", sym " << fmt("%.1e", st.symmetry_residual) << ", null "
      << st.near_null_count << ", mu " << fmt("%.4f", st.mu_estimate) << ", " << fmt("%.1f", secs) << " s; ";
  };
  auto t0 = std::chrono::steady_clock::now();
  const CollisionOperator syn = assemble_L(std::make_shared<const VelocityBasis>(6, 16), KernelSpec::synthetic());
  one("synthetic N6", syn, seconds_since(t0), kSyntheticSeconds);

  const fs::path cache = work_dir() / "cache";
  fs::remove_all(cache);
  t0 = std::chrono::steady_clock::now();
  const CacheOutcome cold = load_or_assemble(std::make_shared<const VelocityBasis>(6, 16), KernelSpec::hard_sphere(),
                                             {}, cache.string());
  one("hard sphere N6 cold", *cold.op, seconds_since(t0), kHardSphereSeconds);
  t0 = std::chrono::steady_clock::now();
  const CacheOutcome warm = load_or_assemble(std::make_shared<const VelocityBasis>(6, 16), KernelSpec::hard_sphere(),
                                             {}, cache.string());
  const double warm_s = seconds_since(t0);
  ok = ok && warm.hit && (warm.op->L() - cold.op->L()).norm() == 0.0;
  d << "cached reload " << (warm.hit ? "hit" : "miss") << " " << fmt("%.2f", warm_s) << " s";
  return {ok, d.str()};
}

Result dispersion_consistency()
{
  const DispersionContext& ctx = hs_ctx();
  double worst = 0.0;
  int points = 0;
  for (int i = 1; i <= 10; ++i)
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
      const double s = 0.1 * i;
      if (eps * s > 0.3) continue;
      ++points;
      const std::vector<cplx> ev = dense_spectrum(assemble_B(ctx.op(), s, eps));
      auto nearest = [&](cplx z) {
        double m = 1e300;
        for (cplx e : ev) m = std::min(m, std::abs(e - z));
        return m;
      };
      for (const RootInfo& r : solve_D1(ctx, s, eps)) worst = std::max(worst, nearest(eps * r.z));
      worst = std::max(worst, nearest(solve_D0(ctx, s, eps).z));
    }
  return {points == 40 && worst <= kRootTol,
          std::to_string(points) + " (s, eps) points, worst root-to-eigenvalue distance " + fmt("%.2e", worst) +
              " (tol " + fmt("%.0e", kRootTol) + ")"};
}

Result asymptotic_slopes()
{
  const DispersionContext& ctx = hs_ctx();
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  std::ostringstream d;
  bool ok = true;
  for (double s : {0.2, 0.5}) {
    std::map<int, std::vector<double>> rem;
    for (double e : eps) {
      const auto r1 = solve_D1(ctx, s, e);
      const cplx l2 = solve_D0(ctx, s, e).z;
      const std::map<int, cplx> lam{{-1, e * r1[0].z}, {0, e * r1[1].z}, {1, e * r1[2].z}, {2, l2}, {3, l2}};
      for (const auto& [j, l] : lam)
        rem[j].push_back(std::abs(l - e * AsymptoticCoefficients::eta(j, s) + e * e * ctx.coeffs().b(j, s)));
    }
    d << "s=" << s << ":";
    for (const auto& [j, r] : rem) {
      const double slope = loglog_fit(eps, r).slope;
      const bool p = std::abs(slope - kSlope3) <= kSlope3Tol;
      ok = ok && p;
      d << " j" << j << " " << fmt("%.2f", slope) << (p ? "" : "*");
    }
    d << "; ";
  }
  d << "target " << kSlope3 << " +- " << kSlope3Tol << ", * marks a miss";
  return {ok, d.str()};
}

Result transport_crosscheck()
{
  const DispersionContext& ctx = hs_ctx();
  const B2Report r = crosscheck_b2(ctx, {0.2, 0.5, 1.0, 2.0}, 0.05);
  const TransportCoefficients t = compute_kappas(ctx.op());
  const double iso = isotropy_residual(ctx.op());
  const bool ok = r.max_rel_err_b2 <= kB2Tol && t.kappa0 > 0 && t.kappa1 > 0 && iso <= kIsoTol;
  return {ok, "b2/s^2 vs kappa0 rel err " + fmt("%.2e", r.max_rel_err_b2) + " (tol " + fmt("%.0e", kB2Tol) +
                  "), kappa0 " + fmt("%.7f", t.kappa0) + ", kappa1 " + fmt("%.7f", t.kappa1) + ", isotropy " +
                  fmt("%.1e", iso)};
}

Result gamma_identities()
{
  const GammaIdentityReport r = gamma_identity_report(hard_sphere6());
  const bool ok = r.within_tol() && r.decreasing();
  return {ok, "one step below exact: " + fmt("%.2e", r.coarse.invariant) + " / " + fmt("%.2e", r.coarse.quadratic) +
                  " / " + fmt("%.2e", r.coarse.quartic) + "; exact level: " + fmt("%.2e", r.fine.invariant) + " / " +
                  fmt("%.2e", r.fine.quadratic) + " / " + fmt("%.2e", r.fine.quartic) + " (tol " +
                  fmt("%.0e", r.tol) + ", round-off floor " + fmt("%.0e", r.roundoff) + ")"};
}

Result semigroup_split()
{
  const DispersionContext& c = hs_ctx();
  const VelocityBasis& b = c.basis();
  const double s = 0.5;
  MacroState u;
  u.n = 0.3;
  u.m = CVec3(0.2, -0.4, 0.1);
  u.q = 0.7;
  const CVec f0 = reconstruct_macro(b, u);
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025}, r;
  for (double e : eps) {
    const ModeOperator m = assemble_B(c.op(), s, e);
    r.push_back(weighted_norm(split_S1_S2(c, m, f0, {0.0})[0].s2, s) / weighted_norm(f0, s));
  }
  const double slope = loglog_fit(eps, r).slope;

  const double e = 0.1;
  const ModeOperator m = assemble_B(c.op(), s, e);
  const double gap = hydrodynamic_spectrum(c, m).gap_alpha;
  std::vector<double> t, y;
  for (int i = 0; i < 12; ++i) t.push_back(e * e * (0.5 + 0.4 * i) / gap);
  for (const SplitPart& p : split_S1_S2(c, m, f0, t)) y.push_back(weighted_norm(p.s2, s));
  const DecayFit f = fit_decay(t, y, DecayModel::exp);
  const bool ok = slope >= kS2Slope && f.ok && f.rate >= gap / (e * e) && f.r2 >= kS2R2;
  return {ok, "S2(0) eps-slope " + fmt("%.3f", slope) + " (>= " + fmt("%.1f", kS2Slope) + "), tail rate " +
                  fmt("%.2f", f.rate) + " vs gap/eps^2 " + fmt("%.2f", gap / (e * e)) + ", R^2 " + fmt("%.5f", f.r2)};
}

Result decay_exponents()
{
  const DispersionContext& ctx = hs_ctx();
  // the smallest shell sits well below 1/sqrt(kappa t_max)
  const SGrid grid = SGrid::make(5e-4, 4.0, 64);
  const InitialData data = make_initial_data(InitialDataSpec::pd_free(), ctx.basis(), grid);
  std::vector<double> times;
  for (int k = 0; k < 16; ++k) times.push_back(200.0 * std::pow(100.0, k / 15.0));
  const DecayStudy ds = decay_study(ctx, data, 0.1, times, {0.1, 0.05, 0.025, 0.0125}, 1.0);
  const bool ok = ds.macro_fit.ok && std::abs(ds.macro_fit.rate - kMacroRate) <= kMacroRateTol &&
                  std::abs(ds.micro_slope - kMicroSlope) <= kMicroSlopeTol;
  return {ok, "macro rate " + fmt("%.3f", ds.macro_fit.rate) + " (R^2 " + fmt("%.5f", ds.macro_fit.r2) +
                  ", target 0.75 +- 0.10), micro eps-slope at t=1 " + fmt("%.3f", ds.micro_slope) +
                  " (target 1 +- 0.1)"};
}

Result diffusion_limit()
{
  const auto t0 = std::chrono::steady_clock::now();
  const CollisionOperator op = assemble_L(std::make_shared<const VelocityBasis>(6, 16), KernelSpec::synthetic());
  const DispersionContext ctx(op);
  const SGrid grid = SGrid::make(0.05, 4.0, 32);
  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  const InitialData data = make_initial_data(InitialDataSpec::well_prepared(), op.basis(), grid);
  const ErrorTable tab = run_convergence_study(ctx, data, eps, make_time_grid(0.0125, 1e-3, 20.0, 40, 20));
  const ConvergenceSummary s = summarize(tab);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(s.slope - kLimitSlope) <= kLimitSlopeTol && secs < kLimitSeconds;
  std::string sup;
  for (double v : s.sup_weighted) sup += fmt("%.4f", v) + " ";
  return {ok, "sup (1+t)^{3/4} err = " + sup + "-> eps-slope " + fmt("%.3f", s.slope) + " (target 1 +- 0.15), " +
                  fmt("%.1f", secs) + " s"};
}

Result initial_layer()
{
  const DispersionContext& ctx = hs_ctx();
  const SGrid grid = SGrid::make(0.05, 4.0, 32);
  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  const InitialData data = make_initial_data(InitialDataSpec::generic(), ctx.basis(), grid);
  const ErrorTable tab = run_convergence_study(ctx, data, eps, make_time_grid(0.0125, 1e-3, 20.0, 40, 20));
  const ConvergenceSummary s = summarize(tab);
  const bool t0_ok = s.err_t0.back() >= 0.5 * s.err_t0.front() && s.err_t0.back() > 1e-3;

  const double probe = 0.5;
  const InitialData shell = make_initial_data(InitialDataSpec::generic(), ctx.basis(), SGrid{{probe}, {1.0}});
  double worst = 0.0;
  for (double e : eps) worst = std::max(worst, layer_frequency(ctx, shell.f0[0], probe, e).rel_err);
  const bool ok = t0_ok && worst <= kFreqTol && std::abs(s.slope_osc - kLimitSlope) <= kLimitSlopeTol;
  return {ok, "err(t=0) " + fmt("%.4f", s.err_t0.front()) + " at eps 0.1, " + fmt("%.4f", s.err_t0.back()) +
                  " at eps 0.0125; frequency at s=0.5 worst rel err " + fmt("%.1e", worst) +
                  "; after removing u_osc and e^{tB/eps^2}P1 f0 eps-slope " + fmt("%.3f", s.slope_osc)};
}

Result nspf_formulas()
{
  const DispersionContext& c = hs_ctx();
  const VelocityBasis& b = c.basis();
  const Vec3 xi(0.3, 0.7, -0.4);
  const double s2 = xi.squaredNorm();
  MacroState raw;
  raw.n = 0.5;
  raw.m = CVec3(0.1, 0.3, -0.2);
  raw.q = cplx(0.2, 0.4);

  // well-prepared values against the projection V(0) P0 of the raw data
  const MacroState u0 = compatible_initial_values(raw, xi);
  const ModeTrajectory v0 = fluid_semigroup_V(c, raw, xi, {0.0});
  const MacroState p = project_macro(b, v0.states[0]);
  const cplx X = raw.q - kSqrt23 * raw.n;
  double alg = std::max({std::abs(p.n - u0.n), std::abs(p.q - u0.q), (p.m - u0.m).norm()});
  alg = std::max(alg, std::abs(u0.n + std::sqrt(6.0) * s2 / (3 + 5 * s2) * X));
  alg = std::max(alg, std::abs(u0.q - (3 + 3 * s2) / (3 + 5 * s2) * X));

  std::vector<double> times;
  for (int i = 0; i <= 40; ++i) times.push_back(0.1 * i);
  std::vector<CVec3> H1, Z1(times.size(), CVec3::Zero());
  std::vector<cplx> H2, Z2(times.size(), 0.0);
  for (double t : times) {
    H1.push_back(CVec3(std::sin(t), cplx(0.2, t), 0.5) * 0.3);
    H2.push_back(cplx(std::cos(2 * t), 0.1));
  }
  double ode = 0.0, cons = 0.0;
  auto diff = [](const FluidModeState& a, const FluidModeState& o) {
    return std::max({std::abs(a.n_hat - o.n_hat), (a.m_hat - o.m_hat).norm(), std::abs(a.q_hat - o.q_hat)});
  };
  const ModeTrajectory v = fluid_semigroup_V(c, u0, xi, times);
  const auto o0 = nspf_mode_ode(c, u0, Z1, Z2, xi, times);
  const auto d = nspf_mode_solve(c, u0, H1, H2, xi, times);
  const auto o = nspf_mode_ode(c, u0, H1, H2, xi, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    ode = std::max({ode, diff(v.fluid[i], o0[i]), diff(d[i], o[i])});
    cons = std::max({cons, constraint_residual(v.fluid[i], xi), constraint_residual(d[i], xi)});
  }
  const bool ok = ode <= kOdeTol && alg <= kAlgebraTol && cons <= kConstraintTol;
  return {ok, "closed form vs ODE " + fmt("%.1e", ode) + " (tol 1e-8), initial values " + fmt("%.1e", alg) +
                  " (tol 1e-12), constraints along trajectories " + fmt("%.1e", cons) + " (tol 1e-12)"};
}

Result determinism()
{
  const fs::path dir = work_dir() / "determinism";
  fs::remove_all(dir);
  std::ostringstream log;
  ExperimentConfig syn = parse_config(
      "schema = 1\nbackend = synthetic\nmax_degree = 4\ns_count = 10\neps_list = 0.1, 0.05, 0.025\n"
      "t_count = 12\nt_layer = 4\nt_max = 5\n");
  ExperimentConfig hs = parse_config("schema = 1\nmax_degree = 4\n");
  syn.out = hs.out = dir.string();
  int runs = 0, same = 0;
  auto twice = [&](const std::string& sub, ExperimentConfig cfg) {
    cfg.jobs = 1;
    const cli::Artifacts x = cli::compute(sub, cfg, log);
    cfg.jobs = 2;
    const cli::Artifacts y = cli::compute(sub, cfg, log);
    const std::string a = x.csv + x.json, b = y.csv + y.json;
    ++runs;
    if (a == b && !a.empty()) ++same;
  };
  for (const auto& sub : cli::subcommands())
    if (sub != "transport") twice(sub, syn);
  twice("transport", hs);
  twice("dispersion", hs);
  fs::remove_all(dir);
  return {same == runs, std::to_string(same) + "/" + std::to_string(runs) +
                            " subcommand reruns byte-identical (jobs 1 vs 2)"};
}

const std::vector<std::pair<std::string, std::function<Result()>>>& criteria()
{
  static const std::vector<std::pair<std::string, std::function<Result()>>> c{
      {"structure suite", structure_suite},
      {"dispersion consistency", dispersion_consistency},
      {"asymptotic remainder slopes", asymptotic_slopes},
      {"transport cross-check", transport_crosscheck},
      {"Gamma identities", gamma_identities},
      {"semigroup split", semigroup_split},
      {"decay exponents", decay_exponents},
      {"diffusion limit, well-prepared data", diffusion_limit},
      {"initial layer, generic data", initial_layer},
      {"NSPF mode formulas", nspf_formulas},
      {"determinism", determinism},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv)
{
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) which.push_back(i);
  int failed = 0;
  for (int k : which) {
    if (k < 1 || k > static_cast<int>(criteria().size())) {
      std::cerr << "no criterion " << k << "\n";
      return 2;
    }
    const auto& [name, fn] = criteria()[k - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failed;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", k, r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(which.size()) - failed, which.size());
  return failed == 0 ? 0 : 1;
}
