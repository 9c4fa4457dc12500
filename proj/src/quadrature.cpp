#include "vpb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace vpb {

Rule1D golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double mu0)
{
  const int n = static_cast<int>(a.size());
  if (n < 1 || static_cast<int>(b.size()) != n - 1)
    throw DomainError("golub_welsch: inconsistent recurrence coefficients");
  Mat J = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = a[i];
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = b[i];

  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  if (es.info() != Eigen::Success) throw Error("golub_welsch: eigensolver failed");

  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
    if (!(r.weights[i] > 0.0))
      throw Error("golub_welsch: non-positive weight at node " + std::to_string(i));
  }
  return r;
}

namespace {

// Symmetric rules: force exact antisymmetry of nodes and symmetric weights so
// odd moments cancel to roundoff.
void symmetrize(Rule1D& r)
{
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
}

}  // namespace

Rule1D gauss_hermite_prob(int n)
{
  std::vector<double> a(n, 0.0), b(n > 0 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) b[k - 1] = std::sqrt(static_cast<double>(k));
  Rule1D r = golub_welsch(a, b, std::sqrt(2.0 * kPi));
  symmetrize(r);
  return r;
}

Rule1D gauss_hermite_phys(int n)
{
  std::vector<double> a(n, 0.0), b(n > 0 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) b[k - 1] = std::sqrt(0.5 * k);
  Rule1D r = golub_welsch(a, b, std::sqrt(kPi));
  symmetrize(r);
  return r;
}

Rule1D gauss_legendre(int n)
{
  std::vector<double> a(n, 0.0), b(n > 0 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) b[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Rule1D r = golub_welsch(a, b, 2.0);
  symmetrize(r);
  return r;
}

Rule1D gauss_legendre(int n, double lo, double hi)
{
  Rule1D r = gauss_legendre(n);
  const double c = 0.5 * (hi + lo), h = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

Rule1D gauss_laguerre(int n, double alpha)
{
  if (alpha <= -1.0) throw DomainError("gauss_laguerre: alpha must exceed -1");
  std::vector<double> a(n), b(n > 0 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) a[k] = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < n; ++k) b[k - 1] = std::sqrt(k * (k + alpha));
  return golub_welsch(a, b, std::tgamma(alpha + 1.0));
}

SphereRule sphere_product_rule(int degree, bool fold_antipodal)
{
  if (degree < 0) throw DomainError("sphere_product_rule: negative degree");
  const int n_theta = degree / 2 + 1;
  int n_phi = degree + 1;
  if (n_phi % 2) ++n_phi;  // antipodal partner of phi is phi + pi
  const Rule1D gl = gauss_legendre(n_theta);
  const double dphi = 2.0 * kPi / n_phi;

  SphereRule s;
  for (int i = 0; i < n_theta; ++i) {
    const double x = gl.nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - x * x));
    for (int j = 0; j < n_phi; ++j) {
      double w = gl.weights[i] * dphi;
      if (fold_antipodal) {
        const bool upper = x > 0.0 || (x == 0.0 && j < n_phi / 2);
        if (!upper) continue;
        w *= 2.0;
      }
      const double phi = j * dphi;
      s.nodes.emplace_back(rho * std::cos(phi), rho * std::sin(phi), x);
      s.weights.push_back(w);
    }
  }
  return s;
}

}  // namespace vpb
