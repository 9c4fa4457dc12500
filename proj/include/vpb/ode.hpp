#pragma once

#include <functional>
#include <map>

#include "vpb/common.hpp"

namespace vpb {

struct OdeTolerance {
  double rtol = 1e-11;
  double atol = 1e-13;
};

// y' = A y with the 3-stage Radau IIA method (order 5, L-stable). Steps are
// controlled by step doubling on a power-of-two ladder so that one-step
// propagators can be factored once and reused.
class LinearRadau {
 public:
  LinearRadau(CMat A, OdeTolerance tol = {});
  // integrates from t0 to t1 >= t0
  CVec advance(const CVec& y, double t0, double t1);
  long steps() const { return steps_; }
  long rejected() const { return rejected_; }

 private:
  const CMat& step_matrix(double h);
  CMat build_step(double h) const;
  double error_norm(const CVec& a, const CVec& b) const;

  CMat A_;
  OdeTolerance tol_;
  double h_ = 0.0;  // current step, always h0_ * 2^k
  double h0_ = 0.0;
  std::map<double, CMat> cache_;
  long steps_ = 0, rejected_ = 0;
};

using OdeRhs = std::function<CVec(double, const CVec&)>;

// Dormand-Prince 5(4) with the usual PI-free step controller
struct Dopri5Stats {
  long steps = 0, rejected = 0;
};
CVec dopri5(const OdeRhs& f, CVec y, double t0, double t1, OdeTolerance tol = {}, Dopri5Stats* stats = nullptr);

}  // namespace vpb
