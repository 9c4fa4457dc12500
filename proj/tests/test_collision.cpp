#include <cmath>
#include <memory>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "vpb/collision.hpp"

using namespace vpb;

namespace {

std::shared_ptr<const VelocityBasis> basis(int N) { return std::make_shared<const VelocityBasis>(N, 2 * N + 4); }

const CollisionOperator& hard_sphere4()
{
  static const CollisionOperator op = assemble_L(basis(4), KernelSpec::hard_sphere());
  return op;
}

}  // namespace

TEST_CASE("nu_hard_sphere against the brute-force oracle")
{
  const double ref0 = oracle::collision_frequency(Vec3::Zero());
  CHECK(std::abs(ref0 - 4.0 * std::sqrt(2.0 * kPi)) < 1e-8);
  CHECK(std::abs(nu_hard_sphere(Vec3::Zero()) - ref0) < 1e-8);
  for (const Vec3& v : std::vector<Vec3>{Vec3(0.7, -0.3, 1.1), Vec3(2.5, 0.0, 0.0), Vec3(0.0, 0.01, 0.0)})
    CHECK(std::abs(nu_hard_sphere(v) - oracle::collision_frequency(v)) < 1e-8);
}

TEST_CASE("nu_hard_sphere isotropy and linear growth")
{
  const Vec3 v(0.4, 1.3, -0.8);
  const Mat3 R = Eigen::AngleAxisd(0.83, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  CHECK(std::abs(nu_hard_sphere(v) - nu_hard_sphere(R * v)) < 1e-12);
  double prev = 0.0;
  for (double a : {1e2, 1e3, 1e4}) {
    const double ratio = nu_hard_sphere(Vec3(a, 0, 0)) / a;
    CHECK(std::abs(ratio - 2 * kPi) < 2 * kPi * 2.0 / (a * a));
    if (prev > 0) CHECK(std::abs(ratio - 2 * kPi) < std::abs(prev - 2 * kPi));
    prev = ratio;
  }
}

TEST_CASE("hard-potential collision frequency against the oracle")
{
  const KernelSpec k = KernelSpec::hard_potential(0.5, 0.7);
  for (const Vec3& v : std::vector<Vec3>{Vec3::Zero(), Vec3(0.2, 0.9, -1.4)})
    CHECK(std::abs(collision_frequency(k, v) - oracle::collision_frequency(v, 0.5, 0.7)) < 1e-8);
}

TEST_CASE("synthetic backend is -nu_bar P1")
{
  const auto b = basis(2);
  const CollisionOperator op = assemble_L(b, KernelSpec::synthetic(1.7));
  CHECK((op.L() + 1.7 * b->P1()).norm() < 1e-15);
  CHECK(op.mu_estimate() == doctest::Approx(1.7).epsilon(1e-13));
  CHECK(op.structure().near_null_count == 5);
  for (int k = 0; k < 5; ++k) CHECK((op.L() * b->chi(k)).norm() < 1e-15);
  CHECK_THROWS_AS(apply_gamma(op, b->chi(0), b->chi(0)), DomainError);
}

TEST_CASE("hard-sphere structure")
{
  const CollisionOperator& op = hard_sphere4();
  const StructureReport& r = op.structure();
  CHECK(r.symmetry_residual <= 1e-10);
  CHECK(r.near_null_count == 5);
  CHECK(r.smallest_singular_values[4] <= 1e-8 * r.norm_L);
  CHECK(r.smallest_singular_values[5] > 1e-2 * r.norm_L);
  CHECK(r.null_residual < 1e-12);
  CHECK(r.max_eigenvalue < 1e-10 * r.norm_L);
  CHECK(op.mu_estimate() > 0.0);
  // fitted bounds hold at the velocity quadrature nodes and at random points
  const auto& nodes = op.basis().quad_nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double w = 1.0 + nodes[i].norm();
    CHECK(op.nu_diag()[i] >= op.nu0() * w * (1 - 1e-12));
    CHECK(op.nu_diag()[i] <= op.nu1() * w * (1 + 1e-12));
  }
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v(nd(rng), nd(rng), nd(rng));
    const double nu = nu_hard_sphere(v);
    CHECK(nu >= op.nu0() * (1 + v.norm()) * (1 - 1e-12));
    CHECK(nu <= op.nu1() * (1 + v.norm()) * (1 + 1e-12));
  }
  CHECK(r.nu_at_zero >= r.nu0);
}

TEST_CASE("hard-sphere quadratic forms match closed-form collision integrals")
{
  // For h = v1 v2 and h = v1 (|v|^2 - 5)/sqrt6 the weak form reduces to
  // elementary Gaussian and spherical moments: -6.4 sqrt(pi) and -(64/9) sqrt(pi).
  const CollisionOperator& op = hard_sphere4();
  const VelocityBasis& b = op.basis();
  const Vec shear = b.coefficients([](const Vec3& v) { return v[0] * v[1]; });
  const Vec heat = b.coefficients([](const Vec3& v) { return v[0] * (v.squaredNorm() - 5.0) / std::sqrt(6.0); });
  CHECK(shear.dot(op.L() * shear) == doctest::Approx(-6.4 * std::sqrt(kPi)).epsilon(1e-12));
  CHECK(heat.dot(op.L() * heat) == doctest::Approx(-64.0 / 9.0 * std::sqrt(kPi)).epsilon(1e-12));
  CHECK(shear.squaredNorm() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(heat.squaredNorm() == doctest::Approx(5.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("assembly is deterministic across job counts")
{
  const auto b = basis(3);
  AssemblyOptions o1, o3;
  o3.jobs = 3;
  const Mat L1 = assemble_L_matrix(*b, KernelSpec::hard_sphere(), o1);
  const Mat L3 = assemble_L_matrix(*b, KernelSpec::hard_sphere(), o3);
  CHECK((L1 - L3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembly converges once the exactness reaches 2N")
{
  const auto b = basis(3);
  AssemblyOptions lo, hi;
  lo.exactness = 6;
  hi.exactness = 10;
  const Mat A = assemble_L_matrix(*b, KernelSpec::hard_sphere(), lo);
  const Mat B = assemble_L_matrix(*b, KernelSpec::hard_sphere(), hi);
  CHECK((A - B).norm() < 1e-12 * B.norm());
}

TEST_CASE("hard-potential kernel assembles a coercive operator")
{
  const CollisionOperator op = assemble_L(basis(3), KernelSpec::hard_potential(0.5));
  CHECK(op.structure().near_null_count == 5);
  CHECK(op.mu_estimate() > 0.0);
  CHECK(op.structure().null_residual < 1e-12);
  CHECK_THROWS_AS(assemble_L(basis(3), KernelSpec::hard_potential(1.2)), DomainError);
}

TEST_CASE("solve_Linv")
{
  const CollisionOperator& op = hard_sphere4();
  const VelocityBasis& b = op.basis();
  CHECK(op.solve_Linv(Vec(Vec::Zero(b.dim()))).norm() == 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Vec h(b.dim());
  for (int i = 0; i < b.dim(); ++i) h[i] = nd(rng);
  h = b.P1() * h;
  const Vec u = op.solve_Linv(Vec(op.L() * h));
  CHECK((u - h).norm() < 1e-10 * h.norm());
  CHECK_THROWS_AS(op.solve_Linv(b.chi(0)), DomainError);

  const Vec a = b.mult(0) * b.chi(2);
  const double k0 = -op.solve_Linv(Vec(b.P1() * a)).dot(a);
  CHECK(k0 > 0.0);
  // variational (first Sonine) lower bound and the known few-percent correction
  CHECK(k0 * 6.4 * std::sqrt(kPi) >= 1.0);
  CHECK(k0 * 6.4 * std::sqrt(kPi) <= 1.02);
}

TEST_CASE("Gamma identities for collision invariants")
{
  const CollisionOperator& op = hard_sphere4();
  const VelocityBasis& b = op.basis();
  const GammaForm G(op);
  CHECK(G.apply(b.chi(0), b.chi(0)).norm() < 1e-13);

  const Vec v2 = b.coefficients([](const Vec3& v) { return v.squaredNorm(); });
  const Vec v4 = b.coefficients([](const Vec3& v) { return std::pow(v.squaredNorm(), 2); });
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Vec fi = b.mult(i) * b.chi(0), fj = b.mult(j) * b.chi(0);
      const Vec vij = b.mult(i) * fj;
      const Vec expect = -0.5 * op.L() * (b.P1() * vij);
      const Vec got = G.apply(fi, fj);
      CHECK((got - expect).norm() <= 1e-10 * std::max(1.0, expect.norm()));
    }
  const Vec g4 = G.apply(v2, v2);
  const Vec e4 = -0.5 * op.L() * (b.P1() * v4);
  CHECK((g4 - e4).norm() <= 1e-10 * e4.norm());
}

TEST_CASE("Gamma ranges in the micro subspace and is symmetric")
{
  const CollisionOperator& op = hard_sphere4();
  const VelocityBasis& b = op.basis();
  const GammaForm G(op);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 3; ++t) {
    Vec f(b.dim()), g(b.dim());
    for (int i = 0; i < b.dim(); ++i) {
      f[i] = nd(rng);
      g[i] = nd(rng);
    }
    const Vec fg = G.apply(f, g), gf = G.apply(g, f);
    CHECK((b.invariants().transpose() * fg).norm() < 1e-10 * fg.norm());
    CHECK((fg - gf).norm() < 1e-12 * fg.norm());
    const Vec f2 = G.apply(Vec(2.0 * f), g);
    CHECK((f2 - 2.0 * fg).norm() < 1e-12 * fg.norm());
  }
}
