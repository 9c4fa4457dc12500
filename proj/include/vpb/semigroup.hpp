#pragma once

#include <string>
#include <vector>

#include "vpb/dispersion.hpp"
#include "vpb/fit.hpp"
#include "vpb/ode.hpp"

namespace vpb {

struct FluidModeState {
  cplx n_hat{0.0};
  CVec3 m_hat = CVec3::Zero();
  cplx q_hat{0.0};
  cplx p_hat{0.0};
  cplx phi_hat{0.0};  // -n_hat/|xi|^2
};

struct ModeTrajectory {
  Vec3 xi = Vec3::Zero();
  double eps = 0.0;
  std::vector<double> times;
  std::vector<CVec> states;
  std::vector<double> norm_track;  // ||state||_xi
  std::vector<FluidModeState> fluid;

  // stiff-integrator oracle, when requested
  std::vector<CVec> oracle_states;
  double oracle_max_diff = -1.0;  // max_t ||eig - ode||_xi
  double eig_condition = 0.0;
  bool eig_path = true;
  std::string note;
};

// e^{(t/eps^2) B} through a dense eigendecomposition of B
class KineticPropagator {
 public:
  explicit KineticPropagator(const ModeOperator& mode, double cond_limit = 1e10);
  bool ok() const { return ok_; }
  double condition() const { return cond_; }
  CVec apply(const CVec& f0, double t) const;
  const ModeOperator& mode() const { return mode_; }

 private:
  ModeOperator mode_;
  CVec lambda_;
  CMat V_;
  Eigen::PartialPivLU<CMat> Vlu_;
  double cond_ = 0.0;
  bool ok_ = false;
};

struct KineticOptions {
  bool oracle = true;
  OdeTolerance tol{1e-11, 1e-13};
  double cond_limit = 1e10;
};

ModeTrajectory propagate_kinetic(const ModeOperator& mode, const CVec& f0, const std::vector<double>& times,
                                 const KineticOptions& opt = {});

// P_eps(xi) f = sum_j (f, conj psi_j)_xi psi_j over the five hydrodynamic branches
struct SpectralProjector {
  Vec3 xi = Vec3::Zero();
  double eps = 0.0;
  CMat P;
  double idempotency_residual() const;
  int rank(double tol = 1e-8) const;
};
SpectralProjector spectral_projector(const HydroSpectrum& hs, const ModeOperator& mode);

struct SplitPart {
  double t = 0.0;
  CVec s1, s2;
};

// S1 = sum_j e^{t lambda_j/eps^2} (f0, conj psi_j)_xi psi_j inside eps|xi| <= r0, else 0;
// S2 = full propagation - S1
std::vector<SplitPart> split_S1_S2(const DispersionContext& ctx, const ModeOperator& mode, const CVec& f0,
                                   const std::vector<double>& times);

// V(t,xi)U0 = sum_{j=0,2,3} e^{-b_j t} (U0, h_j)_xi h_j
ModeTrajectory fluid_semigroup_V(const DispersionContext& ctx, const MacroState& u0, const Vec3& xi,
                                 const std::vector<double>& times);
// the same in closed form, written with explicit thermal and transverse parts
CVec fluid_semigroup_closed_form(const DispersionContext& ctx, const MacroState& u0, const Vec3& xi, double t);

FluidModeState fluid_state(const VelocityBasis& basis, const CVec& U, const Vec3& xi, const CVec3& H1 = CVec3::Zero());

// n(0), q(0) from q0 - sqrt(2/3) n0 and m(0) = O_1 m0, so that the constraints hold
MacroState compatible_initial_values(const MacroState& u0, const Vec3& xi);
// worst of |xi.m| and |n + n/|xi|^2 + sqrt(2/3) q|
double constraint_residual(const MacroState& u, const Vec3& xi);
double constraint_residual(const FluidModeState& u, const Vec3& xi);

// Duhamel solution of the linear NSPF mode equations, forcing linear between samples
std::vector<FluidModeState> nspf_mode_solve(const DispersionContext& ctx, const MacroState& u0,
                                            const std::vector<CVec3>& H1, const std::vector<cplx>& H2,
                                            const Vec3& xi, const std::vector<double>& times,
                                            double constraint_tol = 1e-12);
// direct ODE integration of the same equations written with kappa0, kappa1 (oracle)
std::vector<FluidModeState> nspf_mode_ode(const DispersionContext& ctx, const MacroState& u0,
                                          const std::vector<CVec3>& H1, const std::vector<cplx>& H2,
                                          const Vec3& xi, const std::vector<double>& times,
                                          OdeTolerance tol = {1e-12, 1e-14});

}  // namespace vpb
