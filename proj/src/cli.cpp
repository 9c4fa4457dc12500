#include "vpb/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpb/collision_cache.hpp"
#include "vpb/parallel.hpp"
#include "vpb/transport.hpp"

namespace vpb::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string num(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

std::shared_ptr<const CollisionOperator> operator_for(const ExperimentConfig& cfg, int degree, std::ostream& log)
{
  const int q = degree == cfg.max_degree ? cfg.resolved_quad_order() : 2 * degree + 4;
  auto basis = std::make_shared<const VelocityBasis>(degree, q);
  const CacheOutcome c = load_or_assemble(basis, cfg.kernel(), cfg.assembly(), cache_directory(cfg.out + "/cache"));
  if (!c.notice.empty()) log << c.notice << "\n";
  return c.op;
}

ojson meta(const std::string& sub, const ExperimentConfig& cfg, const CollisionOperator& op)
{
  ojson j;
  j["subcommand"] = sub;
  j["config_hash"] = cfg.hash();
  j["basis_hash"] = op.basis().hash();
  j["backend"] = to_string(op.backend());
  j["kernel"] = op.kernel().describe();
  j["max_degree"] = op.basis().max_degree();
  j["quad_order"] = op.basis().quad_order();
  return j;
}

CVec random_cvec(int n, std::mt19937_64& rng)
{
  std::normal_distribution<double> nd;
  CVec f(n);
  for (int i = 0; i < n; ++i) {
    const double re = nd(rng), im = nd(rng);
    f[i] = cplx(re, im);
  }
  return f;
}

// ---------------------------------------------------------------------------

Artifacts run_check(const ExperimentConfig& cfg, std::ostream& log)
{
  const auto op = operator_for(cfg, cfg.max_degree, log);
  const auto items = property_suite(cfg, *op);
  Artifacts a;
  a.csv = "property,value,threshold,pass\n";
  ojson j = meta("check", cfg, *op);
  ojson arr = ojson::array();
  for (const CheckItem& c : items) {
    a.csv += c.name + "," + num(c.value) + "," + num(c.threshold) + "," + (c.pass ? "1" : "0") + "\n";
    arr.push_back({{"property", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    a.ok = a.ok && c.pass;
    if (!c.pass) log << "check failed: " << c.name << " = " << c.value << " (threshold " << c.threshold << ")\n";
  }
  j["properties"] = arr;
  j["all_pass"] = a.ok;
  a.json = j.dump(2) + "\n";
  return a;
}

Artifacts run_spectrum(const ExperimentConfig& cfg, std::ostream& log)
{
  const auto op = operator_for(cfg, cfg.max_degree, log);
  const DispersionContext ctx(*op, cfg.regime());
  const ModeOperator mode = assemble_B(*op, cfg.mode_s, cfg.mode_eps);
  std::vector<cplx> ev = dense_spectrum(mode);
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag();
  });
  std::vector<int> label(ev.size(), 99);
  ojson j = meta("spectrum", cfg, *op);
  j["s"] = cfg.mode_s;
  j["eps"] = cfg.mode_eps;
  if (cfg.mode_eps * cfg.mode_s <= cfg.r0) {
    const HydroSpectrum hs = hydrodynamic_spectrum(ctx, mode);
    for (const BranchPoint& bp : hs.branches) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < ev.size(); ++k)
        if (std::abs(ev[k] - bp.lambda) < std::abs(ev[best] - bp.lambda)) best = k;
      label[best] = bp.branch;
    }
    j["gap_alpha"] = hs.gap_alpha;
  } else {
    log << "spectrum: eps s > r0, hydrodynamic branches not labelled\n";
  }
  Artifacts a;
  a.csv = "index,re,im,branch\n";
  for (std::size_t k = 0; k < ev.size(); ++k)
    a.csv += std::to_string(k) + "," + num(ev[k].real()) + "," + num(ev[k].imag()) + "," +
             (label[k] == 99 ? std::string() : std::to_string(label[k])) + "\n";
  j["eigenvalues"] = ev.size();
  a.json = j.dump(2) + "\n";
  return a;
}

Artifacts run_dispersion(const ExperimentConfig& cfg, std::ostream& log)
{
  const auto op = operator_for(cfg, cfg.max_degree, log);
  const DispersionContext ctx(*op, cfg.regime());
  struct Point {
    double s, eps;
  };
  std::vector<Point> pts;
  for (double s : cfg.dispersion_s)
    for (double e : cfg.eps_list) {
      if (e * s <= cfg.r0)
        pts.push_back({s, e});
      else
        log << "dispersion: skipping s = " << s << ", eps = " << e << " (eps s > r0)\n";
    }
  std::vector<HydroSpectrum> res(pts.size());
  parallel_for(static_cast<int>(pts.size()), cfg.jobs, [&](int i) {
    res[i] = hydrodynamic_spectrum(ctx, assemble_B(*op, pts[i].s, pts[i].eps));
  });
  Artifacts a;
  a.csv = "branch,s,eps,re_lambda,im_lambda,asymptotic_remainder,det_residual,eig_residual\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (const BranchPoint& bp : res[i].branches) {
      const double s = pts[i].s, e = pts[i].eps;
      const cplx rem = bp.lambda - e * AsymptoticCoefficients::eta(bp.branch, s) + e * e * ctx.coeffs().b(bp.branch, s);
      a.csv += std::to_string(bp.branch) + "," + num(s) + "," + num(e) + "," + num(bp.lambda.real()) + "," +
               num(bp.lambda.imag()) + "," + num(std::abs(rem)) + "," + num(bp.det_residual) + "," +
               num(bp.eig_residual) + "\n";
    }
  ojson j = meta("dispersion", cfg, *op);
  j["points"] = pts.size();
  j["r0"] = cfg.r0;
  j["r1"] = cfg.r1;
  j["mu"] = ctx.mu();
  a.json = j.dump(2) + "\n";
  return a;
}

Artifacts run_transport(const ExperimentConfig& cfg, std::ostream& log)
{
  if (cfg.backend == Backend::synthetic)
    throw ConfigError(0, "backend", "transport coefficients need a genuine collision kernel, not synthetic");
  const auto op = operator_for(cfg, cfg.max_degree, log);
  const auto fine = operator_for(cfg, cfg.max_degree + 2, log);
  const TransportCoefficients t = compute_kappas(*op, *fine);
  ojson j = meta("transport", cfg, *op);
  j["kappa0"] = t.kappa0;
  j["kappa1"] = t.kappa1;
  j["error_bar"] = {{"kappa0", t.error_bar0}, {"kappa1", t.error_bar1}};
  j["error_bar_degrees"] = {cfg.max_degree, cfg.max_degree + 2};
  j["isotropy_residual"] = isotropy_residual(*op);
  Artifacts a;
  a.csv = "quantity,value,error_bar\nkappa0," + num(t.kappa0) + "," + num(t.error_bar0) + "\nkappa1," +
          num(t.kappa1) + "," + num(t.error_bar1) + "\n";
  a.json = j.dump(2) + "\n";
  return a;
}

Artifacts run_semigroup(const ExperimentConfig& cfg, std::ostream& log)
{
  const auto op = operator_for(cfg, cfg.max_degree, log);
  const DispersionContext ctx(*op, cfg.regime());
  const ModeOperator mode = assemble_B(*op, cfg.mode_s, cfg.mode_eps);
  const InitialData d = make_initial_data(cfg.data_spec(), op->basis(), SGrid{{cfg.mode_s}, {1.0}});
  const CVec& f0 = d.f0[0];
  const std::vector<double> times = cfg.time_grid();
  KineticOptions ko;
  ko.oracle = false;
  const ModeTrajectory tr = propagate_kinetic(mode, f0, times, ko);
  const auto split = split_S1_S2(ctx, mode, f0, times);
  if (cfg.mode_eps * cfg.mode_s > cfg.r0) log << "semigroup: eps s > r0, S1 = 0 and S2 is the full flow\n";
  const Mat& P0 = op->basis().P0();
  const Mat& P1 = op->basis().P1();
  Artifacts a;
  a.csv = "t,norm_f,norm_P0f,norm_P1f,norm_S2\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const CVec& f = tr.states[i];
    a.csv += num(times[i]) + "," + num(weighted_norm(f, mode.s)) + "," + num(weighted_norm(CVec(P0 * f), mode.s)) +
             "," + num(weighted_norm(CVec(P1 * f), mode.s)) + "," + num(weighted_norm(split[i].s2, mode.s)) + "\n";
  }
  ojson j = meta("semigroup", cfg, *op);
  j["s"] = cfg.mode_s;
  j["eps"] = cfg.mode_eps;
  j["data"] = to_string(cfg.data);
  j["eig_condition_log10"] = std::round(std::log10(std::max(tr.eig_condition, 1.0)));
  a.json = j.dump(2) + "\n";
  return a;
}

Artifacts run_converge(const ExperimentConfig& cfg, std::ostream& log)
{
  const auto op = operator_for(cfg, cfg.max_degree, log);
  const DispersionContext ctx(*op, cfg.regime());
  const SGrid grid = cfg.s_grid();
  const InitialData data = make_initial_data(cfg.data_spec(), op->basis(), grid);
  const ErrorTable tab = run_convergence_study(ctx, data, cfg.eps_list, cfg.time_grid(), cfg.jobs);
  const ConvergenceSummary sum = summarize(tab);

  const Mat& P0 = op->basis().P0();
  const InitialDataSpec spec = cfg.data_spec();
  const RefinementCheck ref = norm_refinement(
      [&](double s) { return CVec(P0 * make_initial_data(spec, op->basis(), SGrid{{s}, {1.0}}).f0[0]); }, cfg.s_min,
      cfg.s_max, cfg.s_count, cfg.s_spacing);
  if (ref.warning)
    log << "converge: s-grid too coarse, doubling the shell count changes the initial norm by " << ref.rel_change
        << "\n";

  ojson j = meta("converge", cfg, *op);
  j["data"] = to_string(cfg.data);
  j["columns"] = {"eps", "t", "err_Linf_P", "err_macro", "err_micro", "err_osc"};
  j["s_grid"] = {{"min", cfg.s_min}, {"max", cfg.s_max}, {"count", cfg.s_count}, {"spacing", to_string(cfg.s_spacing)}};
  j["eps"] = sum.eps;
  j["sup_weighted_3_4"] = sum.sup_weighted;
  j["sup_weighted_osc_1_2"] = sum.sup_weighted_osc;
  j["err_t0"] = sum.err_t0;
  j["slope"] = sum.slope;
  j["slope_osc"] = sum.slope_osc;
  j["grid_refinement_change"] = ref.rel_change;
  j["grid_warning"] = ref.warning;
  Artifacts a;
  a.csv = tab.csv();
  a.json = j.dump(2) + "\n";
  return a;
}

}  // namespace

const std::vector<std::string>& subcommands()
{
  static const std::vector<std::string> s{"check", "spectrum", "dispersion", "transport", "semigroup", "converge"};
  return s;
}

std::vector<CheckItem> property_suite(const ExperimentConfig& cfg, const CollisionOperator& op)
{
  std::vector<CheckItem> out;
  auto add = [&](std::string name, double v, double thr, bool pass) { out.push_back({std::move(name), v, thr, pass}); };
  auto le = [&](std::string name, double v, double thr) { add(std::move(name), v, thr, v <= thr); };

  const VelocityBasis& b = op.basis();
  const StructureReport& st = op.structure();
  std::mt19937_64 rng(cfg.seed);

  le("basis_orthonormality", (b.gram() - Mat::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff(), 1e-10);
  le("L_symmetry", st.symmetry_residual, 1e-10);
  le("L_null_residual", st.null_residual, 1e-10);
  add("near_null_count", st.near_null_count, 5, st.near_null_count == 5);
  add("mu_positive", st.mu_estimate, 0.0, st.mu_estimate > 0.0);
  le("L_max_eigenvalue", st.max_eigenvalue, 1e-10 * st.norm_L);

  {
    const Vec h = b.P1() * random_cvec(b.dim(), rng).real();
    const Vec back = op.solve_Linv(op.L() * h);
    le("solve_Linv_roundtrip", (back - h).norm() / h.norm(), 1e-9);
  }
  if (op.kernel().genuine()) {
    const Vec f = random_cvec(b.dim(), rng).real(), g = random_cvec(b.dim(), rng).real();
    const Vec G = apply_gamma(op, f, g);
    le("gamma_orthogonality", (b.invariants().transpose() * G).norm() / G.norm(), 1e-10);
    const TransportCoefficients t = compute_kappas(op);
    add("kappa_positive", std::min(t.kappa0, t.kappa1), 0.0, t.kappa0 > 0.0 && t.kappa1 > 0.0);
    le("kappa_isotropy", isotropy_residual(op), 1e-10);
    const GammaIdentityReport gi = gamma_identity_report(op, cfg.tol_quad);
    le("gamma_identities", gi.fine.worst(), cfg.tol_quad);
    add("gamma_identities_decrease", gi.coarse.worst(), gi.fine.worst(), gi.decreasing());
  }

  const DispersionContext ctx(op, cfg.regime());
  const double s = cfg.mode_s, eps = cfg.mode_eps;
  const ModeOperator mode = assemble_B(op, s, eps);
  {
    // (1+s^-2)^{-1/2} ||T|| <= ||T||_xi <= (1+s^-2)^{1/2} ||T||
    double worst = 0.0;
    const double c = std::sqrt(1.0 + 1.0 / (s * s));
    for (int k = 0; k < 4; ++k) {
      const CVec u = random_cvec(b.dim(), rng), w = random_cvec(b.dim(), rng);
      const CMat T = u * w.adjoint();
      const double plain = Eigen::JacobiSVD<CMat>(T).singularValues()(0), xi = metric_operator_norm(T, s);
      worst = std::max({worst, xi / (c * plain) - 1.0, 1.0 / c - xi / plain});
    }
    le("metric_sandwich_slack", worst, 1e-12);
  }
  {
    const CVec f0 = random_cvec(b.dim(), rng);
    const KineticPropagator prop(mode);
    double worst = 0.0;
    for (double t : {1e-4, 1e-2, 0.1, 1.0})
      worst = std::max(worst, weighted_norm(prop.apply(f0, t), s) / weighted_norm(f0, s) - 1.0);
    le("contraction_excess", worst, 1e-10);
  }
  if (eps * s <= cfg.r0) {
    const HydroSpectrum hs = hydrodynamic_spectrum(ctx, mode);
    const std::vector<cplx> ev = dense_spectrum(mode);
    auto nearest = [&](cplx z) {
      double d = 1e300;
      for (cplx e : ev) d = std::min(d, std::abs(e - z));
      return d;
    };
    double dist = 0.0;
    const auto roots = solve_D1(ctx, s, eps);
    for (const RootInfo& r : roots) dist = std::max(dist, nearest(eps * r.z));
    dist = std::max(dist, nearest(solve_D0(ctx, s, eps).z));
    le("dispersion_root_vs_dense", dist, 1e-8);
    le("conjugate_pairing", std::abs(hs.branch(-1).lambda - std::conj(hs.branch(1).lambda)), 1e-10);
    double re = -1e300;
    for (const BranchPoint& bp : hs.branches) re = std::max(re, bp.lambda.real());
    add("branches_decay", re, 0.0, re < 0.0);
    le("transverse_double", std::abs(hs.branch(2).lambda - hs.branch(3).lambda), 1e-10);
    add("spectral_gap", hs.gap_alpha, 0.0, hs.gap_alpha > 0.0);
    le("projector_idempotency", spectral_projector(hs, mode).idempotency_residual(), 1e-8);
  }
  {
    const Vec3 xi(s, 0.3 * s, -0.2 * s);
    MacroState u;
    u.n = 0.3;
    u.m = CVec3(0.2, 0.5, -0.1);
    u.q = 0.7;
    const MacroState c = compatible_initial_values(u, xi);
    le("compatible_values_constraints", constraint_residual(c, xi), 1e-12);
    const std::vector<double> times{0.0, 0.1, 0.5, 1.0, 2.0};
    const std::vector<CVec3> H1(times.size(), CVec3::Zero());
    const std::vector<cplx> H2(times.size(), 0.0);
    const auto a = nspf_mode_solve(ctx, c, H1, H2, xi, times);
    const auto o = nspf_mode_ode(ctx, c, H1, H2, xi, times);
    double d = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      d = std::max({d, std::abs(a[i].n_hat - o[i].n_hat), (a[i].m_hat - o[i].m_hat).norm(),
                    std::abs(a[i].q_hat - o[i].q_hat)});
    le("nspf_closed_form_vs_ode", d, 1e-8);
  }
  {
    const Mat& P0 = b.P0();
    const InitialDataSpec spec = cfg.data_spec();
    const RefinementCheck ref = norm_refinement(
        [&](double x) { return CVec(P0 * make_initial_data(spec, b, SGrid{{x}, {1.0}}).f0[0]); }, cfg.s_min,
        cfg.s_max, cfg.s_count, cfg.s_spacing);
    le("s_grid_refinement", ref.rel_change, 0.05);
  }
  return out;
}

Artifacts compute(const std::string& sub, const ExperimentConfig& cfg, std::ostream& log)
{
  if (sub == "check") return run_check(cfg, log);
  if (sub == "spectrum") return run_spectrum(cfg, log);
  if (sub == "dispersion") return run_dispersion(cfg, log);
  if (sub == "transport") return run_transport(cfg, log);
  if (sub == "semigroup") return run_semigroup(cfg, log);
  if (sub == "converge") return run_converge(cfg, log);
  throw DomainError("unknown subcommand '" + sub + "'");
}

std::string write_artifacts(const std::string& sub, const ExperimentConfig& cfg, const Artifacts& a)
{
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  const fs::path base = fs::path(cfg.out) / (sub + "-" + cfg.hash());
  auto put = [](const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + p.string());
    os << text;
  };
  put(base.string() + ".csv", a.csv);
  put(base.string() + ".json", a.json);
  return base.string() + ".csv";
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"vpbkit: Fourier-mode experiments for the linearized Vlasov-Poisson-Boltzmann system"};
  std::string sub, config_path, backend, out_dir;
  int jobs = 0;
  app.add_option("subcommand", sub, "check | spectrum | dispersion | transport | semigroup | converge")
      ->required()
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "key = value experiment file (defaults apply without one)");
  app.add_option("--backend", backend, "hard_sphere | hard_potential | synthetic, overrides the config");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory, overrides the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "vpbkit: " << e.what() << "\n";
    return kBadInput;
  }

  ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("schema = 1\n") : load_config(config_path);
    if (!backend.empty()) {
      try {
        cfg.backend = backend_from_string(backend);
      } catch (const DomainError& e) {
        throw ConfigError(0, "--backend", e.what());
      }
    }
    if (jobs > 0) cfg.jobs = jobs;
    if (!out_dir.empty()) cfg.out = out_dir;
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "vpbkit: invalid configuration: " << e.what() << "\n";
    return kBadInput;
  }

  try {
    const Artifacts a = compute(sub, cfg, err);
    const std::string path = write_artifacts(sub, cfg, a);
    out << path << "\n";
    return a.ok ? kOk : kCheckFailed;
  } catch (const ConfigError& e) {
    err << "vpbkit: invalid configuration: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    err << "vpbkit: " << sub << " failed: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace vpb::cli
