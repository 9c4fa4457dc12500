#include "vpb/ode.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace vpb {

namespace {

// Radau IIA, three stages
struct RadauTableau {
  Eigen::Matrix3d A;
  RadauTableau()
  {
    const double r6 = std::sqrt(6.0);
    A << (88.0 - 7.0 * r6) / 360.0, (296.0 - 169.0 * r6) / 1800.0, (-2.0 + 3.0 * r6) / 225.0,
        (296.0 + 169.0 * r6) / 1800.0, (88.0 + 7.0 * r6) / 360.0, (-2.0 - 3.0 * r6) / 225.0,
        (16.0 - r6) / 36.0, (16.0 + r6) / 36.0, 1.0 / 9.0;
  }
};

const RadauTableau& radau() {
  static const RadauTableau t;
  return t;
}

}  // namespace

LinearRadau::LinearRadau(CMat A, OdeTolerance tol) : A_(std::move(A)), tol_(tol)
{
  if (A_.rows() != A_.cols()) throw DomainError("LinearRadau: square matrix required");
  const double nrm = std::max(A_.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  h0_ = std::exp2(std::floor(std::log2(0.05 / nrm)));
  h_ = h0_;
}

CMat LinearRadau::build_step(double h) const
{
  // stages Y_i = y + h sum_j a_ij A Y_j, and y_new = Y_3 (stiffly accurate)
  const int n = static_cast<int>(A_.rows());
  const auto& a = radau().A;
  CMat K = CMat::Identity(3 * n, 3 * n);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K.block(i * n, j * n, n, n) -= (h * a(i, j)) * A_;
  CMat rhs(3 * n, n);
  for (int i = 0; i < 3; ++i) rhs.block(i * n, 0, n, n).setIdentity();
  const CMat Y = Eigen::PartialPivLU<CMat>(K).solve(rhs);
  return Y.bottomRows(n);
}

const CMat& LinearRadau::step_matrix(double h)
{
  auto it = cache_.find(h);
  if (it != cache_.end()) return it->second;
  if (cache_.size() > 64) cache_.clear();
  return cache_.emplace(h, build_step(h)).first->second;
}

double LinearRadau::error_norm(const CVec& a, const CVec& b) const
{
  double e = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double sc = tol_.atol + tol_.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    e = std::max(e, std::abs(a[i] - b[i]) / sc);
  }
  return e;
}

CVec LinearRadau::advance(const CVec& y0, double t0, double t1)
{
  if (t1 < t0) throw DomainError("LinearRadau: backwards integration");
  CVec y = y0;
  double t = t0;
  while (t < t1) {
    const double rem = t1 - t;
    const bool last = rem <= h_;
    const double h = last ? rem : h_;
    const CVec full = step_matrix(h) * y;
    const CMat& half = step_matrix(0.5 * h);
    const CVec two = half * (half * y);
    // local error of the two half steps is about (full - two)/31 for an order-5 method
    const double err = error_norm(full, two) / 31.0;
    if (err > 1.0 && h > 1e-300) {
      ++rejected_;
      h_ = std::min(h_, std::exp2(std::floor(std::log2(h))) ) * 0.5;
      if (h_ < h0_ * 1e-12) throw SolverFailure("LinearRadau: step size underflow");
      continue;
    }
    ++steps_;
    y = two;
    t = last ? t1 : t + h;
    if (!last && err < 1.0 / 128.0) h_ *= 2.0;
  }
  return y;
}

// ---------------------------------------------------------------------------

CVec dopri5(const OdeRhs& f, CVec y, double t0, double t1, OdeTolerance tol, Dopri5Stats* stats)
{
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                      e6 = 22.0 / 525, e7 = -1.0 / 40;
  if (t1 < t0) throw DomainError("dopri5: backwards integration");
  if (t1 == t0) return y;
  double t = t0;
  double h = std::min(1e-3, t1 - t0);
  CVec k1 = f(t, y);
  Dopri5Stats st;
  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    const CVec k2 = f(t + c2 * h, y + h * a21 * k1);
    const CVec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const CVec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const CVec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const CVec k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const CVec yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const CVec k7 = f(t + h, yn);
    const CVec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
    if (en <= 1.0) {
      t = (t + h >= t1) ? t1 : t + h;
      y = yn;
      k1 = k7;
      ++st.steps;
    } else {
      ++st.rejected;
    }
    h *= fac;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw SolverFailure("dopri5: step size underflow");
  }
  if (stats) *stats = st;
  return y;
}

}  // namespace vpb
