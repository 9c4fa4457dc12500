#include <cmath>

#include <doctest.h>

#include "vpb/quadrature.hpp"

using namespace vpb;

namespace {

double double_factorial(int n)
{
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

double sum_moment(const Rule1D& r, int k)
{
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
  return s;
}

}  // namespace

TEST_CASE("probabilists' Gauss-Hermite integrates Gaussian moments")
{
  const Rule1D r = gauss_hermite_prob(10);
  const double norm = std::sqrt(2.0 * kPi);
  for (int k = 0; k <= 19; ++k) {
    if (k % 2)
      CHECK(std::abs(sum_moment(r, k) / norm) < 1e-12 * double_factorial(k));
    else
      CHECK(sum_moment(r, k) / norm == doctest::Approx(double_factorial(k - 1)).epsilon(1e-12));
  }
}

TEST_CASE("physicists' Gauss-Hermite uses weight exp(-x^2)")
{
  const Rule1D r = gauss_hermite_phys(6);
  // int x^{2k} e^{-x^2} = Gamma(k+1/2)
  for (int k = 0; k <= 5; ++k)
    CHECK(sum_moment(r, 2 * k) == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-12));
  CHECK(std::abs(sum_moment(r, 7)) < 1e-12);
}

TEST_CASE("Gauss-Legendre and mapped interval")
{
  const Rule1D r = gauss_legendre(7);
  for (int k = 0; k <= 13; ++k) {
    const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
    CHECK(sum_moment(r, k) == doctest::Approx(exact).epsilon(1e-13));
  }
  const Rule1D m = gauss_legendre(5, 1.0, 3.0);
  CHECK(sum_moment(m, 3) == doctest::Approx((81.0 - 1.0) / 4.0).epsilon(1e-13));
}

TEST_CASE("generalized Gauss-Laguerre")
{
  for (double alpha : {0.0, 0.5, 1.0, 0.75}) {
    const Rule1D r = gauss_laguerre(5, alpha);
    for (int k = 0; k <= 9; ++k)
      CHECK(sum_moment(r, k) == doctest::Approx(std::tgamma(k + alpha + 1.0)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(gauss_laguerre(3, -1.5), DomainError);
}

TEST_CASE("sphere product rule exactness, folded and unfolded")
{
  for (bool fold : {false, true}) {
    const SphereRule s = sphere_product_rule(8, fold);
    double w = 0, x2y2 = 0, x4 = 0, z6 = 0, x2y2z4 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Vec3& n = s.nodes[i];
      w += s.weights[i];
      x2y2 += s.weights[i] * n[0] * n[0] * n[1] * n[1];
      x4 += s.weights[i] * std::pow(n[0], 4);
      z6 += s.weights[i] * std::pow(n[2], 6);
      x2y2z4 += s.weights[i] * n[0] * n[0] * n[1] * n[1] * std::pow(n[2], 4);
      CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(w == doctest::Approx(4 * kPi).epsilon(1e-14));
    CHECK(x2y2 == doctest::Approx(4 * kPi / 15).epsilon(1e-13));
    CHECK(x4 == doctest::Approx(4 * kPi / 5).epsilon(1e-13));
    CHECK(z6 == doctest::Approx(4 * kPi / 7).epsilon(1e-13));
    // int x^2 y^2 z^4 = 4 pi * 1*1*3 / (3*5*7*9)
    CHECK(x2y2z4 == doctest::Approx(4 * kPi * 3.0 / 945.0).epsilon(1e-13));
  }
  const SphereRule full = sphere_product_rule(8, false);
  const SphereRule half = sphere_product_rule(8, true);
  CHECK(half.size() * 2 == full.size());
}
