#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vpb/common.hpp"

namespace vpb {

using MultiIndex = std::array<int, 3>;

// Orthonormal tensor Hermite functions phi_a(v) = P_a(v) sqrt(M(v)) of total
// degree <= max_degree, ordered graded-lexicographically:
//   degree ascending, then a[0] descending, then a[1] descending.
// P_a(v) = prod_k He_{a_k}(v_k)/sqrt(a_k!) with He the probabilists' Hermite
// polynomials, so that int phi_a phi_b dv = E[P_a(Z) P_b(Z)] for Z ~ N(0, I).
//
// Quadrature nodes/weights are a product Gauss-Hermite rule for that Gaussian
// expectation; weights sum to one.
class VelocityBasis {
 public:
  VelocityBasis(int max_degree, int quad_order);

  static int dim_for(int max_degree);

  int max_degree() const { return max_degree_; }
  int quad_order() const { return quad_order_; }
  int dim() const { return static_cast<int>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int index_of(const MultiIndex& a) const;  // -1 when outside the truncation
  int degree(int a) const;

  const std::vector<Vec3>& quad_nodes() const { return nodes_; }
  const std::vector<double>& quad_weights() const { return weights_; }
  // P_a at the quadrature nodes, (#nodes x dim)
  const Mat& node_values() const { return node_values_; }

  // polynomial parts P_a(v) for every a; out must hold dim() doubles
  void eval_poly(const Vec3& v, double* out) const;
  Vec eval_poly(const Vec3& v) const;
  // phi_a(v) including the Gaussian factor
  Vec eval(const Vec3& v) const;

  // coefficients of p(v) sqrt(M(v)) by quadrature; exact for deg p + max_degree
  // <= 2 quad_order - 1
  Vec coefficients(const std::function<double(const Vec3&)>& p) const;

  // columns chi_0..chi_4: sqrt M, v_1 sqrt M, v_2 sqrt M, v_3 sqrt M, (|v|^2-3)/sqrt6 sqrt M
  const Mat& invariants() const { return chi_; }
  Vec chi(int k) const { return chi_.col(k); }
  int density_index() const { return 0; }
  // basis positions carrying chi_0..chi_4 (chi_4 spreads over the three 2e_k entries)
  std::array<std::vector<int>, 5> invariant_indices() const;

  // truncated multiplication by v_k: v_k phi_a = sqrt(a_k+1) phi_{a+e_k} + sqrt(a_k) phi_{a-e_k}
  const Mat& mult(int k) const { return mult_[k]; }
  Mat mult_along(const Vec3& dir) const;

  const Mat& P0() const { return p0_; }
  const Mat& P1() const { return p1_; }
  const Mat& Pd() const { return pd_; }

  Mat gram() const;

  // U with (T_R f)(v) = f(R v) acting on coefficients
  Mat rotation_operator(const Mat3& R) const;

  std::string descriptor_json() const;
  std::string hash() const;

 private:
  int max_degree_;
  int quad_order_;
  std::vector<MultiIndex> indices_;
  std::vector<int> lookup_;  // (N+1)^3 cube -> position or -1
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  Mat node_values_;
  Mat chi_;
  std::array<Mat, 3> mult_;
  Mat p0_, p1_, pd_;
};

// Macroscopic moments. Complex because Fourier modes carry complex amplitudes.
struct MacroState {
  cplx n{0.0};
  CVec3 m = CVec3::Zero();
  cplx q{0.0};
  cplx phi_factor{0.0};  // n/|xi|^2, zero when no mode is attached
};

MacroState project_macro(const VelocityBasis& basis, const CVec& f);
MacroState project_macro(const VelocityBasis& basis, const CVec& f, double xi_norm);
CVec reconstruct_macro(const VelocityBasis& basis, const MacroState& u);

// (f,g) + |xi|^-2 (P_d f, P_d g), conjugate-linear in g
cplx weighted_inner(const CVec& f, const CVec& g, double xi_norm);
// same without conjugation: (f, conj g)_xi
cplx weighted_bilinear(const CVec& f, const CVec& g, double xi_norm);
double weighted_norm(const CVec& f, double xi_norm);
// metric matrix G with (f,g)_xi = g^H G f
Mat weighted_metric(int dim, double xi_norm);

}  // namespace vpb
