#include "vpb/collision.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/minima.hpp>

#include "vpb/parallel.hpp"

namespace vpb {

std::string to_string(Backend b)
{
  switch (b) {
    case Backend::hard_sphere: return "hard_sphere";
    case Backend::hard_potential: return "hard_potential";
    case Backend::synthetic: return "synthetic";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& s)
{
  if (s == "hard_sphere") return Backend::hard_sphere;
  if (s == "hard_potential") return Backend::hard_potential;
  if (s == "synthetic") return Backend::synthetic;
  throw DomainError("unknown backend '" + s + "' (expected hard_sphere, hard_potential or synthetic)");
}

std::string KernelSpec::describe() const
{
  std::ostringstream os;
  os.precision(17);
  os << to_string(backend);
  if (backend == Backend::synthetic)
    os << "(nu_bar=" << nu_bar << ")";
  else
    os << "(gamma=" << gamma << ",C=" << angular_c << ")";
  return os.str();
}

namespace {

// E|a e - Z|^gamma for Z ~ N(0, I_3)
double mean_abs_power(double a, double gamma)
{
  if (gamma == 1.0) {
    if (a < 1e-6) return 2.0 * std::sqrt(2.0 / kPi) * (1.0 + a * a / 6.0);
    return (a + 1.0 / a) * std::erf(a / std::sqrt(2.0)) + std::sqrt(2.0 / kPi) * std::exp(-0.5 * a * a);
  }
  if (a < 1e-8)
    return std::pow(2.0, 0.5 * gamma) * std::tgamma(0.5 * (3.0 + gamma)) / std::tgamma(1.5);
  // (1/(a sqrt(2 pi))) int_0^inf r^{gamma+1} 2 exp(-(r^2+a^2)/2) sinh(a r) dr
  static const Rule1D gl = gauss_legendre(400);
  const double hi = a + 14.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    // r = hi x^2 clusters nodes at the r^{gamma+2} endpoint
    const double x = 0.5 * (gl.nodes[i] + 1.0);
    const double r = hi * x * x;
    const double jac = 0.5 * gl.weights[i] * 2.0 * hi * x;
    acc += jac * std::pow(r, gamma + 1.0) * 2.0 * std::exp(-0.5 * (r * r + a * a)) * std::sinh(a * r);
  }
  return acc / (a * std::sqrt(2.0 * kPi));
}

void check_kernel(const KernelSpec& k)
{
  if (k.backend == Backend::synthetic) {
    if (!(k.nu_bar > 0.0)) throw DomainError("synthetic backend: nu_bar must be positive");
    return;
  }
  if (!(k.angular_c > 0.0)) throw DomainError("collision kernel: angular constant C must be positive");
  if (k.backend == Backend::hard_sphere) {
    if (k.gamma != 1.0 || k.angular_c != 1.0)
      throw DomainError("hard_sphere kernel is fixed to gamma = 1, C = 1");
    return;
  }
  if (!(k.gamma >= 0.0 && k.gamma < 1.0))
    throw DomainError("hard_potential kernel requires 0 <= gamma < 1");
}

}  // namespace

double collision_frequency(const KernelSpec& kernel, const Vec3& v)
{
  if (kernel.backend == Backend::synthetic) return kernel.nu_bar;
  // int_S2 C |cos theta| domega = 2 pi C
  return 2.0 * kPi * kernel.angular_c * mean_abs_power(v.norm(), kernel.gamma);
}

double nu_hard_sphere(const Vec3& v)
{
  return collision_frequency(KernelSpec::hard_sphere(), v);
}

CollisionQuadrature collision_quadrature(const KernelSpec& kernel, int p)
{
  check_kernel(kernel);
  if (kernel.backend == Backend::synthetic)
    throw DomainError("collision_quadrature: synthetic backend has no collision integral");
  if (p < 0) throw DomainError("collision_quadrature: negative exactness");

  CollisionQuadrature cq;
  cq.exactness = p;
  const int half = p / 2;

  const Rule1D gv = gauss_hermite_phys(half + 1);
  for (std::size_t i = 0; i < gv.size(); ++i)
    for (std::size_t j = 0; j < gv.size(); ++j)
      for (std::size_t k = 0; k < gv.size(); ++k) {
        cq.V.emplace_back(gv.nodes[i], gv.nodes[j], gv.nodes[k]);
        cq.wV.push_back(gv.weights[i] * gv.weights[j] * gv.weights[k]);
      }

  // Only even powers of r occur, so rho = r^2/4 carries a polynomial of degree
  // <= p/2 against rho^{(1+gamma)/2} e^{-rho}.
  const double gamma = kernel.gamma;
  const int n_r = (half + 2) / 2;
  const Rule1D lag = gauss_laguerre(n_r, 0.5 * (1.0 + gamma));
  for (std::size_t i = 0; i < lag.size(); ++i) {
    cq.r.push_back(2.0 * std::sqrt(lag.nodes[i]));
    cq.wr.push_back(std::pow(2.0, 2.0 + gamma) * lag.weights[i]);
  }

  cq.sphere = sphere_product_rule(p, true);
  cq.prefactor = 0.5 * kernel.angular_c * std::pow(2.0 * kPi, -3.0);
  return cq;
}

namespace {

// A(V, w) = P(V + w/2) + P(V - w/2) for all basis polynomials
struct PairEval {
  const VelocityBasis& basis;
  Vec plus, minus;
  explicit PairEval(const VelocityBasis& b) : basis(b), plus(b.dim()), minus(b.dim()) {}
  void operator()(const Vec3& V, const Vec3& w)
  {
    basis.eval_poly(V + 0.5 * w, plus.data());
    basis.eval_poly(V - 0.5 * w, minus.data());
  }
};

int chunk_count(std::size_t n) { return static_cast<int>(std::min<std::size_t>(n, 64)); }

std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, int chunks, int c)
{
  const std::size_t lo = n * static_cast<std::size_t>(c) / chunks;
  const std::size_t hi = n * static_cast<std::size_t>(c + 1) / chunks;
  return {lo, hi};
}

}  // namespace

Mat assemble_L_matrix(const VelocityBasis& basis, const KernelSpec& kernel, const AssemblyOptions& opt)
{
  check_kernel(kernel);
  const int n = basis.dim();
  if (kernel.backend == Backend::synthetic) return -kernel.nu_bar * basis.P1();

  const int p = opt.exactness < 0 ? 2 * basis.max_degree() : opt.exactness;
  const CollisionQuadrature cq = collision_quadrature(kernel, p);
  const std::size_t ns = cq.sphere.size();
  double W = 0.0;
  for (double w : cq.sphere.weights) W += w;

  // (L phi_a, phi_b) = -1/4 int B M M* dP_a dP_b with dP = A(V,r sigma) - A(V,r u_hat).
  // Summing over both sphere rules collapses to 2W sum_i w_i (A_i - Abar)(A_i - Abar)^T.
  const int chunks = chunk_count(cq.V.size());
  std::vector<Mat> partial(chunks);
  parallel_for(chunks, opt.jobs, [&](int c) {
    const auto [lo, hi] = chunk_range(cq.V.size(), chunks, c);
    Mat Y(static_cast<Eigen::Index>((hi - lo) * cq.r.size() * ns), n);
    PairEval pe(basis);
    Mat A(ns, n);
    Eigen::Index row = 0;
    for (std::size_t iv = lo; iv < hi; ++iv)
      for (std::size_t ir = 0; ir < cq.r.size(); ++ir) {
        Vec mean = Vec::Zero(n);
        for (std::size_t i = 0; i < ns; ++i) {
          pe(cq.V[iv], cq.r[ir] * cq.sphere.nodes[i]);
          A.row(i) = (pe.plus + pe.minus).transpose();
          mean += cq.sphere.weights[i] * A.row(i).transpose();
        }
        mean /= W;
        for (std::size_t i = 0; i < ns; ++i) {
          const double s = std::sqrt(cq.wV[iv] * cq.wr[ir] * cq.sphere.weights[i]);
          Y.row(row++) = s * (A.row(i) - mean.transpose());
        }
      }
    Mat acc = Mat::Zero(n, n);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose());
    partial[c] = acc.selfadjointView<Eigen::Lower>();
  });

  Mat S = Mat::Zero(n, n);
  for (const auto& P : partial) S += P;
  Mat L = -0.25 * cq.prefactor * 2.0 * W * S;
  return 0.5 * (L + L.transpose());
}

CollisionOperator::CollisionOperator(std::shared_ptr<const VelocityBasis> basis, KernelSpec kernel,
                                     Mat L, int exactness)
    : basis_(std::move(basis)), kernel_(kernel), exactness_(exactness), L_(std::move(L))
{
  check_kernel(kernel_);
  const int n = basis_->dim();
  if (L_.rows() != n || L_.cols() != n) throw AssemblyFailure("collision operator: matrix size mismatch");

  StructureReport& rep = report_;
  const Mat Ls = 0.5 * (L_ + L_.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(Ls, Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  rep.norm_L = ev.cwiseAbs().maxCoeff();
  rep.max_eigenvalue = ev.maxCoeff();
  rep.symmetry_residual = (L_ - L_.transpose()).norm() / std::max(rep.norm_L, 1e-300);
  std::vector<double> sv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) sv[i] = std::abs(ev[i]);
  std::sort(sv.begin(), sv.end());
  rep.smallest_singular_values.assign(sv.begin(), sv.begin() + std::min<std::size_t>(6, sv.size()));
  rep.near_null_count = static_cast<int>(
      std::count_if(sv.begin(), sv.end(), [&](double x) { return x <= 1e-8 * rep.norm_L; }));
  rep.null_residual = 0.0;
  for (int k = 0; k < 5; ++k)
    rep.null_residual = std::max(rep.null_residual, (L_ * basis_->chi(k)).norm() / rep.norm_L);

  Eigen::HouseholderQR<Mat> qr(basis_->invariants());
  const Mat Qfull = qr.householderQ() * Mat::Identity(n, n);
  Q_ = Qfull.rightCols(n - 5);
  L_mic_ = Q_.transpose() * Ls * Q_;
  L_mic_ = 0.5 * (L_mic_ + L_mic_.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> em(L_mic_, Eigen::EigenvaluesOnly);
  rep.mu_estimate = -em.eigenvalues().maxCoeff();
  if (!(rep.mu_estimate > 0.0)) {
    std::ostringstream os;
    os << "assemble_L: coercivity failure, largest micro eigenvalue " << -rep.mu_estimate
       << "; top of spectrum:";
    for (int i = 0; i < std::min<Eigen::Index>(6, ev.size()); ++i) os << ' ' << ev[ev.size() - 1 - i];
    os << " (quadrature under-resolved?)";
    throw AssemblyFailure(os.str());
  }
  neg_L_mic_.compute(-L_mic_);
  if (neg_L_mic_.info() != Eigen::Success) throw AssemblyFailure("assemble_L: micro block not definite");

  const auto& nodes = basis_->quad_nodes();
  nu_diag_.resize(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) nu_diag_[i] = collision_frequency(kernel_, nodes[i]);

  // nu is radial: fit nu0, nu1 on a dense radial sample including the far field
  const double g = kernel_.backend == Backend::synthetic ? 0.0 : kernel_.gamma;
  rep.nu_at_zero = collision_frequency(kernel_, Vec3::Zero());
  rep.nu0 = rep.nu1 = rep.nu_at_zero;
  auto ratio = [&](double a) { return collision_frequency(kernel_, Vec3(a, 0, 0)) / std::pow(1.0 + a, g); };
  const double h = 0.01;
  int imin = 0, imax = 0;
  for (int i = 1; i <= 4000; ++i) {
    const double q = ratio(h * i);
    if (q < rep.nu0) rep.nu0 = q, imin = i;
    if (q > rep.nu1) rep.nu1 = q, imax = i;
  }
  // polish interior extrema of the grid scan
  if (imin > 0 && imin < 4000) {
    auto r = boost::math::tools::brent_find_minima(ratio, h * (imin - 1), h * (imin + 1), 52);
    rep.nu0 = std::min(rep.nu0, r.second);
  }
  if (imax > 0 && imax < 4000) {
    auto r = boost::math::tools::brent_find_minima([&](double a) { return -ratio(a); }, h * (imax - 1),
                                                   h * (imax + 1), 52);
    rep.nu1 = std::max(rep.nu1, -r.second);
  }
  if (g > 0.0) {
    // far field: nu ~ 2 pi C a^gamma
    rep.nu0 = std::min(rep.nu0, 2.0 * kPi * kernel_.angular_c);
    rep.nu1 = std::max(rep.nu1, 2.0 * kPi * kernel_.angular_c);
  }
}

Vec CollisionOperator::solve_Linv(const Vec& g, double tol) const
{
  const int n = basis_->dim();
  if (g.size() != n) throw DomainError("solve_Linv: length mismatch");
  const double gn = g.norm();
  if (gn == 0.0) return Vec::Zero(n);
  const Vec macro = basis_->invariants().transpose() * g;
  if (macro.norm() > tol * gn)
    throw DomainError("solve_Linv: right-hand side has a kernel component (|P0 g|/|g| = " +
                      std::to_string(macro.norm() / gn) + "), inversion is ill-posed");
  const Vec y = neg_L_mic_.solve(-(Q_.transpose() * g));
  const Vec u = Q_ * y;
  const double res = (L_ * u - g).norm();
  if (res > tol * gn)
    throw SolverFailure("solve_Linv: residual " + std::to_string(res / gn) + " above tolerance");
  return u;
}

CVec CollisionOperator::solve_Linv_c(const CVec& g, double tol) const
{
  CVec u(g.size());
  u.real() = solve_Linv(Vec(g.real()), tol);
  u.imag() = solve_Linv(Vec(g.imag()), tol);
  return u;
}

CollisionOperator assemble_L(std::shared_ptr<const VelocityBasis> basis, const KernelSpec& kernel,
                             const AssemblyOptions& opt)
{
  Mat L = assemble_L_matrix(*basis, kernel, opt);
  const int p = opt.exactness < 0 ? 2 * basis->max_degree() : opt.exactness;
  CollisionOperator op(std::move(basis), kernel, std::move(L), kernel.genuine() ? p : 0);
  if (op.structure().symmetry_residual > opt.tol_quad)
    throw AssemblyFailure("assemble_L: symmetry residual above tol_quad");
  return op;
}

int coefficient_degree(const VelocityBasis& basis, const Vec& f, double tol)
{
  const double m = f.cwiseAbs().maxCoeff();
  int d = 0;
  for (int a = 0; a < basis.dim(); ++a)
    if (std::abs(f[a]) > tol * m) d = std::max(d, basis.degree(a));
  return d;
}

GammaForm::GammaForm(const CollisionOperator& op) : basis_(op.basis_ptr()), kernel_(op.kernel())
{
  if (!kernel_.genuine())
    throw DomainError("apply_gamma: Gamma is defined only for genuine collision kernels, not the synthetic backend");
}

int GammaForm::default_exactness(const Vec& f, const Vec& g) const
{
  return coefficient_degree(*basis_, f) + coefficient_degree(*basis_, g) + basis_->max_degree();
}

Vec GammaForm::apply(const Vec& f, const Vec& g, int exactness) const
{
  const VelocityBasis& basis = *basis_;
  const int n = basis.dim();
  if (f.size() != n || g.size() != n) throw DomainError("apply_gamma: length mismatch");
  if (f.norm() == 0.0 || g.norm() == 0.0) return Vec::Zero(n);
  const int p = exactness < 0 ? default_exactness(f, g) : exactness;
  const CollisionQuadrature cq = collision_quadrature(kernel_, p);
  const std::size_t ns = cq.sphere.size();
  double W = 0.0;
  for (double w : cq.sphere.weights) W += w;

  // (Gamma(f,g), phi_c) = 1/4 int B M M* S_fg dP_c, S_fg = h_f(v*) h_g(v) + h_f(v) h_g(v*);
  // the sigma integral of dP_c is m_c - W A_c(r u_hat).
  const int chunks = chunk_count(cq.V.size());
  std::vector<Vec> partial(chunks);
  parallel_for(chunks, jobs_, [&](int c) {
    const auto [lo, hi] = chunk_range(cq.V.size(), chunks, c);
    PairEval pe(basis);
    Mat A(ns, n);
    Vec S(ns);
    Vec acc = Vec::Zero(n);
    for (std::size_t iv = lo; iv < hi; ++iv)
      for (std::size_t ir = 0; ir < cq.r.size(); ++ir) {
        Vec m = Vec::Zero(n);
        for (std::size_t i = 0; i < ns; ++i) {
          pe(cq.V[iv], cq.r[ir] * cq.sphere.nodes[i]);
          A.row(i) = (pe.plus + pe.minus).transpose();
          m += cq.sphere.weights[i] * A.row(i).transpose();
          const double fp = pe.plus.dot(f), fm = pe.minus.dot(f);
          const double gp = pe.plus.dot(g), gm = pe.minus.dot(g);
          S[i] = fm * gp + fp * gm;
        }
        const double w = cq.wV[iv] * cq.wr[ir];
        double sw = 0.0;
        Vec sa = Vec::Zero(n);
        for (std::size_t i = 0; i < ns; ++i) {
          sw += cq.sphere.weights[i] * S[i];
          sa += (cq.sphere.weights[i] * S[i]) * A.row(i).transpose();
        }
        acc += w * (sw * m - W * sa);
      }
    partial[c] = acc;
  });
  Vec out = Vec::Zero(n);
  for (const auto& v : partial) out += v;
  return 0.25 * cq.prefactor * out;
}

CVec GammaForm::apply(const CVec& f, const CVec& g, int exactness) const
{
  const Vec fr = f.real(), fi = f.imag(), gr = g.real(), gi = g.imag();
  auto ap = [&](const Vec& a, const Vec& b) {
    return (a.norm() == 0.0 || b.norm() == 0.0) ? Vec::Zero(a.size()) : apply(a, b, exactness);
  };
  CVec out(f.size());
  out.real() = ap(fr, gr) - ap(fi, gi);
  out.imag() = ap(fr, gi) + ap(fi, gr);
  return out;
}

Vec apply_gamma(const CollisionOperator& op, const Vec& f, const Vec& g, int exactness)
{
  return GammaForm(op).apply(f, g, exactness);
}

}  // namespace vpb
