#pragma once

#include <vector>

#include "vpb/common.hpp"

namespace vpb {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Golub-Welsch from the Jacobi matrix (diag a, off-diagonal b, zeroth moment mu0).
Rule1D golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double mu0);

// weight exp(-x^2/2) on R
Rule1D gauss_hermite_prob(int n);
// weight exp(-x^2) on R
Rule1D gauss_hermite_phys(int n);
// weight 1 on [-1,1]
Rule1D gauss_legendre(int n);
// Legendre mapped to [lo,hi]
Rule1D gauss_legendre(int n, double lo, double hi);
// weight x^alpha exp(-x) on (0,inf)
Rule1D gauss_laguerre(int n, double alpha);

struct SphereRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // sum to 4*pi
  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre in cos(theta) times trapezoid in phi, exact for polynomials of
// total degree <= degree. With fold_antipodal only one node of each antipodal
// pair is kept with doubled weight; valid for even integrands only.
SphereRule sphere_product_rule(int degree, bool fold_antipodal);

}  // namespace vpb
