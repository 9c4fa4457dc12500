#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vpb/common.hpp"
#include "vpb/quadrature.hpp"
#include "vpb/velocity_space.hpp"

namespace vpb {

enum class Backend { hard_sphere, hard_potential, synthetic };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

// B(|u|, omega) = C |cos theta| |u|^gamma. Hard spheres are C = 1, gamma = 1.
struct KernelSpec {
  Backend backend = Backend::hard_sphere;
  double gamma = 1.0;
  double angular_c = 1.0;
  double nu_bar = 1.0;  // synthetic relaxation rate

  static KernelSpec hard_sphere() { return {}; }
  static KernelSpec hard_potential(double gamma, double c = 1.0)
  {
    return {Backend::hard_potential, gamma, c, 1.0};
  }
  static KernelSpec synthetic(double nu_bar = 1.0) { return {Backend::synthetic, 0.0, 1.0, nu_bar}; }
  bool genuine() const { return backend != Backend::synthetic; }
  std::string describe() const;
};

// nu(v) = int int B(|v - v*|, omega) M(v*) domega dv*
double collision_frequency(const KernelSpec& kernel, const Vec3& v);
double nu_hard_sphere(const Vec3& v);

// Product rule for the collision integrals in center-of-mass variables
// V = (v+v*)/2, u = v - v* = r u_hat and post-collisional u' = r sigma.
// Exact for polynomial integrands of total degree <= exactness.
struct CollisionQuadrature {
  int exactness = 0;
  std::vector<Vec3> V;
  std::vector<double> wV;  // weight exp(-|V|^2)
  std::vector<double> r;
  std::vector<double> wr;  // weight r^{2+gamma} exp(-r^2/4) dr
  SphereRule sphere;       // antipodally folded, total weight 4 pi
  double prefactor = 0.0;  // (C/2) (2 pi)^-3 from the sigma form of B and M M*
  std::size_t points() const { return V.size() * r.size() * sphere.size(); }
};

CollisionQuadrature collision_quadrature(const KernelSpec& kernel, int exactness);

struct AssemblyOptions {
  int exactness = -1;  // default 2 * max_degree
  int jobs = 1;
  double tol_quad = 1e-10;
};

struct StructureReport {
  double norm_L = 0.0;
  double symmetry_residual = 0.0;  // relative to norm_L
  double null_residual = 0.0;      // max_k |L chi_k| / norm_L
  std::vector<double> smallest_singular_values;  // ascending, first six
  double max_eigenvalue = 0.0;
  double mu_estimate = 0.0;
  double nu_at_zero = 0.0;
  double nu0 = 0.0, nu1 = 0.0;
  int near_null_count = 0;  // singular values <= 1e-8 norm_L
};

class CollisionOperator {
 public:
  // Wraps an assembled matrix and runs the structural checks. Throws
  // AssemblyFailure when coercivity on the micro subspace fails.
  CollisionOperator(std::shared_ptr<const VelocityBasis> basis, KernelSpec kernel, Mat L,
                    int exactness);

  const VelocityBasis& basis() const { return *basis_; }
  std::shared_ptr<const VelocityBasis> basis_ptr() const { return basis_; }
  Backend backend() const { return kernel_.backend; }
  const KernelSpec& kernel() const { return kernel_; }
  int exactness() const { return exactness_; }

  const Mat& L() const { return L_; }
  const Vec& nu_diag() const { return nu_diag_; }
  double mu_estimate() const { return report_.mu_estimate; }
  double nu0() const { return report_.nu0; }
  double nu1() const { return report_.nu1; }
  const StructureReport& structure() const { return report_; }

  // orthonormal basis of the micro subspace N0^perp, dim x (dim - 5)
  const Mat& micro_basis() const { return Q_; }
  const Mat& L_micro() const { return L_mic_; }

  Vec solve_Linv(const Vec& g, double tol = 1e-10) const;
  CVec solve_Linv_c(const CVec& g, double tol = 1e-10) const;

 private:
  std::shared_ptr<const VelocityBasis> basis_;
  KernelSpec kernel_;
  int exactness_;
  Mat L_;
  Vec nu_diag_;
  Mat Q_;
  Mat L_mic_;
  Eigen::LLT<Mat> neg_L_mic_;
  StructureReport report_;
};

Mat assemble_L_matrix(const VelocityBasis& basis, const KernelSpec& kernel,
                      const AssemblyOptions& opt = {});

CollisionOperator assemble_L(std::shared_ptr<const VelocityBasis> basis, const KernelSpec& kernel,
                             const AssemblyOptions& opt = {});

// Galerkin projection of Gamma(f,g) = M^{-1/2} Q(sqrt(M) f, sqrt(M) g), evaluated
// on demand. The quadrature exactness defaults to deg f + deg g + max_degree,
// which integrates the weak form exactly.
class GammaForm {
 public:
  explicit GammaForm(const CollisionOperator& op);

  Vec apply(const Vec& f, const Vec& g, int exactness = -1) const;
  CVec apply(const CVec& f, const CVec& g, int exactness = -1) const;
  int default_exactness(const Vec& f, const Vec& g) const;

 private:
  std::shared_ptr<const VelocityBasis> basis_;
  KernelSpec kernel_;
  int jobs_ = 1;
};

Vec apply_gamma(const CollisionOperator& op, const Vec& f, const Vec& g, int exactness = -1);

// highest degree carrying a coefficient above tol (relative to the max)
int coefficient_degree(const VelocityBasis& basis, const Vec& f, double tol = 1e-14);

}  // namespace vpb
