#include "vpb/velocity_space.hpp"

#include <cmath>

#include <json.hpp>

#include "vpb/hash.hpp"
#include "vpb/quadrature.hpp"

namespace vpb {

namespace {

// normalized He_n(x)/sqrt(n!) for n = 0..N
inline void hermite_row(double x, int N, double* out)
{
  out[0] = 1.0;
  if (N >= 1) out[1] = x;
  for (int n = 1; n < N; ++n)
    out[n + 1] = (x * out[n] - std::sqrt(static_cast<double>(n)) * out[n - 1]) /
                 std::sqrt(static_cast<double>(n + 1));
}

}  // namespace

int VelocityBasis::dim_for(int N)
{
  return (N + 1) * (N + 2) * (N + 3) / 6;
}

VelocityBasis::VelocityBasis(int max_degree, int quad_order)
    : max_degree_(max_degree), quad_order_(quad_order)
{
  if (max_degree < 2) throw DomainError("build_basis: max_degree must be >= 2");
  if (quad_order < max_degree + 2)
    throw DomainError("build_basis: quad_order must be >= max_degree + 2");

  const int N = max_degree;
  const int side = N + 1;
  lookup_.assign(side * side * side, -1);
  for (int d = 0; d <= N; ++d)
    for (int a0 = d; a0 >= 0; --a0)
      for (int a1 = d - a0; a1 >= 0; --a1) {
        const int a2 = d - a0 - a1;
        lookup_[(a0 * side + a1) * side + a2] = static_cast<int>(indices_.size());
        indices_.push_back({a0, a1, a2});
      }
  const int n = dim();

  const Rule1D gh = gauss_hermite_prob(quad_order);
  const double norm1d = 1.0 / std::sqrt(2.0 * kPi);
  for (int i = 0; i < quad_order; ++i)
    for (int j = 0; j < quad_order; ++j)
      for (int k = 0; k < quad_order; ++k) {
        const double w = gh.weights[i] * gh.weights[j] * gh.weights[k] * norm1d * norm1d * norm1d;
        if (!(w > 0.0))
          throw Error("build_basis: degenerate quadrature, non-positive weight at node (" +
                      std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")");
        nodes_.emplace_back(gh.nodes[i], gh.nodes[j], gh.nodes[k]);
        weights_.push_back(w);
      }

  node_values_.resize(static_cast<Eigen::Index>(nodes_.size()), n);
  Vec row(n);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    eval_poly(nodes_[i], row.data());
    node_values_.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }

  chi_ = Mat::Zero(n, 5);
  chi_(0, 0) = 1.0;
  chi_(index_of({1, 0, 0}), 1) = 1.0;
  chi_(index_of({0, 1, 0}), 2) = 1.0;
  chi_(index_of({0, 0, 1}), 3) = 1.0;
  const double c4 = 1.0 / std::sqrt(3.0);
  chi_(index_of({2, 0, 0}), 4) = c4;
  chi_(index_of({0, 2, 0}), 4) = c4;
  chi_(index_of({0, 0, 2}), 4) = c4;

  for (int k = 0; k < 3; ++k) {
    Mat V = Mat::Zero(n, n);
    for (int b = 0; b < n; ++b) {
      MultiIndex up = indices_[b];
      up[k] += 1;
      const int iu = index_of(up);
      if (iu >= 0) V(iu, b) = std::sqrt(static_cast<double>(indices_[b][k] + 1));
      if (indices_[b][k] > 0) {
        MultiIndex dn = indices_[b];
        dn[k] -= 1;
        V(index_of(dn), b) = std::sqrt(static_cast<double>(indices_[b][k]));
      }
    }
    mult_[k] = V;
  }

  p0_ = chi_ * chi_.transpose();
  p1_ = Mat::Identity(n, n) - p0_;
  pd_ = Mat::Zero(n, n);
  pd_(0, 0) = 1.0;
}

int VelocityBasis::index_of(const MultiIndex& a) const
{
  const int side = max_degree_ + 1;
  if (a[0] < 0 || a[1] < 0 || a[2] < 0) return -1;
  if (a[0] + a[1] + a[2] > max_degree_) return -1;
  return lookup_[(a[0] * side + a[1]) * side + a[2]];
}

int VelocityBasis::degree(int a) const
{
  const auto& m = indices_[a];
  return m[0] + m[1] + m[2];
}

void VelocityBasis::eval_poly(const Vec3& v, double* out) const
{
  const int N = max_degree_;
  double h[3][32];
  if (N >= 32) throw DomainError("eval_poly: max_degree too large");
  for (int k = 0; k < 3; ++k) hermite_row(v[k], N, h[k]);
  const int n = dim();
  for (int a = 0; a < n; ++a) {
    const auto& m = indices_[a];
    out[a] = h[0][m[0]] * h[1][m[1]] * h[2][m[2]];
  }
}

Vec VelocityBasis::eval_poly(const Vec3& v) const
{
  Vec out(dim());
  eval_poly(v, out.data());
  return out;
}

Vec VelocityBasis::eval(const Vec3& v) const
{
  const double g = std::pow(2.0 * kPi, -0.75) * std::exp(-0.25 * v.squaredNorm());
  return g * eval_poly(v);
}

Vec VelocityBasis::coefficients(const std::function<double(const Vec3&)>& p) const
{
  Vec wp(static_cast<Eigen::Index>(nodes_.size()));
  for (std::size_t i = 0; i < nodes_.size(); ++i) wp[i] = weights_[i] * p(nodes_[i]);
  return node_values_.transpose() * wp;
}

std::array<std::vector<int>, 5> VelocityBasis::invariant_indices() const
{
  return {std::vector<int>{0},
          std::vector<int>{index_of({1, 0, 0})},
          std::vector<int>{index_of({0, 1, 0})},
          std::vector<int>{index_of({0, 0, 1})},
          std::vector<int>{index_of({2, 0, 0}), index_of({0, 2, 0}), index_of({0, 0, 2})}};
}

Mat VelocityBasis::mult_along(const Vec3& dir) const
{
  return dir[0] * mult_[0] + dir[1] * mult_[1] + dir[2] * mult_[2];
}

Mat VelocityBasis::gram() const
{
  const Vec w = Eigen::Map<const Vec>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
  return node_values_.transpose() * w.asDiagonal() * node_values_;
}

Mat VelocityBasis::rotation_operator(const Mat3& R) const
{
  const Eigen::Index nn = static_cast<Eigen::Index>(nodes_.size());
  Mat rotated(nn, dim());
  Vec row(dim());
  for (Eigen::Index i = 0; i < nn; ++i) {
    eval_poly(R * nodes_[i], row.data());
    rotated.row(i) = weights_[i] * row.transpose();
  }
  // U_ab = E[P_a(Z) P_b(R Z)]
  return node_values_.transpose() * rotated;
}

std::string VelocityBasis::descriptor_json() const
{
  std::string order;
  for (const auto& m : indices_)
    order += std::to_string(m[0]) + "." + std::to_string(m[1]) + "." + std::to_string(m[2]) + ";";
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["basis"] = "tensor_hermite_function";
  j["max_degree"] = max_degree_;
  j["quad_order"] = quad_order_;
  j["dim"] = dim();
  j["index_order"] = "graded_lex_desc";
  j["index_order_hash"] = hex64(fnv1a64(order));
  return j.dump();
}

std::string VelocityBasis::hash() const
{
  return hex64(fnv1a64(descriptor_json()));
}

MacroState project_macro(const VelocityBasis& basis, const CVec& f)
{
  if (f.size() != basis.dim()) throw DomainError("project_macro: length mismatch");
  const CVec c = basis.invariants().transpose().cast<cplx>() * f;
  MacroState u;
  u.n = c[0];
  u.m = CVec3(c[1], c[2], c[3]);
  u.q = c[4];
  return u;
}

MacroState project_macro(const VelocityBasis& basis, const CVec& f, double xi_norm)
{
  if (!(xi_norm > 0.0)) throw DomainError("project_macro: |xi| must be positive");
  MacroState u = project_macro(basis, f);
  u.phi_factor = u.n / (xi_norm * xi_norm);
  return u;
}

CVec reconstruct_macro(const VelocityBasis& basis, const MacroState& u)
{
  Eigen::Matrix<cplx, 5, 1> c;
  c << u.n, u.m[0], u.m[1], u.m[2], u.q;
  return basis.invariants().cast<cplx>() * c;
}

cplx weighted_inner(const CVec& f, const CVec& g, double xi_norm)
{
  if (!(xi_norm > 0.0))
    throw DomainError("weighted_inner: |xi| must be positive, the weighted metric is undefined at xi = 0");
  if (f.size() != g.size()) throw DomainError("weighted_inner: length mismatch");
  return g.dot(f) + f[0] * std::conj(g[0]) / (xi_norm * xi_norm);
}

cplx weighted_bilinear(const CVec& f, const CVec& g, double xi_norm)
{
  if (!(xi_norm > 0.0)) throw DomainError("weighted_bilinear: |xi| must be positive");
  if (f.size() != g.size()) throw DomainError("weighted_bilinear: length mismatch");
  return (f.array() * g.array()).sum() + f[0] * g[0] / (xi_norm * xi_norm);
}

double weighted_norm(const CVec& f, double xi_norm)
{
  return std::sqrt(std::max(0.0, weighted_inner(f, f, xi_norm).real()));
}

Mat weighted_metric(int dim, double xi_norm)
{
  if (!(xi_norm > 0.0)) throw DomainError("weighted_metric: |xi| must be positive");
  Mat G = Mat::Identity(dim, dim);
  G(0, 0) += 1.0 / (xi_norm * xi_norm);
  return G;
}

}  // namespace vpb
