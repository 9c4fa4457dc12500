#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vpb/semigroup.hpp"

namespace vpb {

enum class Spacing { gauss, linear, geometric };
std::string to_string(Spacing s);
Spacing spacing_from_string(const std::string& s);

// radial quadrature: int_0^inf F(s) s^2 ds ~ sum_k w_k s_k^2 F(s_k)
struct SGrid {
  std::vector<double> s, w;
  static SGrid make(double s_min, double s_max, int count, Spacing spacing = Spacing::gauss);
  std::size_t size() const { return s.size(); }
};

enum class DataKind { generic, well_prepared };
std::string to_string(DataKind k);

struct InitialDataSpec {
  DataKind kind = DataKind::generic;
  std::function<double(double)> profile = [](double s) { return std::exp(-s * s); };
  MacroState shape;              // amplitudes on the canonical mode s e_1, scaled by profile(s)
  double micro_amplitude = 0.0;  // generic only: weight of v1 v2 sqrt(M) and He_3(v1) sqrt(M)
  bool auto_correct = true;      // well_prepared: apply the compatible values instead of refusing

  static InitialDataSpec generic();
  static InitialDataSpec well_prepared();
  static InitialDataSpec pd_free();  // macro data without density, no micro part
};

struct InitialData {
  DataKind kind = DataKind::generic;
  SGrid grid;
  std::vector<CVec> f0;  // canonical frame, one per shell
  std::vector<MacroState> macro;
};

InitialData make_initial_data(const InitialDataSpec& spec, const VelocityBasis& basis, const SGrid& grid);

// 4 pi sum_k s_k^2 w_k ||f(s_k)||_{s_k}: the Fourier-L1 bound of the L^inf_P norm
double synth_norm_LinfP(const SGrid& grid, const std::vector<CVec>& field);
// (4 pi sum_k s_k^2 w_k ||f(s_k)||_{s_k}^2)^{1/2}: the L^2_P norm by Plancherel
double synth_norm_L2P(const SGrid& grid, const std::vector<CVec>& field);

struct RefinementCheck {
  double coarse = 0.0, fine = 0.0, rel_change = 0.0;
  bool warning = false;  // change above 5 %
};
RefinementCheck norm_refinement(const std::function<CVec(double)>& field, double s_min, double s_max, int count,
                                Spacing spacing = Spacing::gauss);

// sum_{j=+-1} e^{(eta_j/eps - b_j) t} (P0 f0, h_j)_xi h_j on every shell
std::vector<CVec> oscillation_part(const DispersionContext& ctx, const InitialData& data, double t, double eps);

// geometric times in [t_min, t_max] plus a uniform layer window [0, 10 eps_min]
std::vector<double> make_time_grid(double eps_min, double t_min, double t_max, int geometric, int layer);

struct ErrorRow {
  double eps = 0.0, t = 0.0;
  double err_LinfP = 0.0;   // f - u
  double err_macro = 0.0;   // P0 (f - u)
  double err_micro = 0.0;   // P1 f
  double err_osc = 0.0;     // f - u - u_osc - e^{tB/eps^2} P1 f0
};

struct ErrorTable {
  std::vector<ErrorRow> rows;
  std::vector<double> s, w;
  std::string basis_hash;
  std::string backend;
  DataKind kind = DataKind::generic;
  std::string csv() const;
};

ErrorTable run_convergence_study(const DispersionContext& ctx, const InitialData& data,
                                 const std::vector<double>& eps_list, const std::vector<double>& times, int jobs = 1);

struct ConvergenceSummary {
  std::vector<double> eps;
  std::vector<double> sup_weighted;      // sup_t (1+t)^{3/4} err_LinfP
  std::vector<double> sup_weighted_osc;  // sup_t (1+t)^{1/2} err_osc
  std::vector<double> err_t0;
  double slope = 0.0, slope_osc = 0.0;
};
ConvergenceSummary summarize(const ErrorTable& table);

// angular frequency of the density at one shell, from the peak of a windowed DTFT
struct FrequencyEstimate {
  double measured = 0.0, predicted = 0.0, rel_err = 0.0;
};
FrequencyEstimate layer_frequency(const DispersionContext& ctx, const CVec& f0, double s, double eps);

// Macro decay of a P_d-free packet and the eps-size of its micro part
struct DecayStudy {
  DecayFit macro_fit;
  std::vector<double> eps, micro;  // ||P1 f(t_probe)||_{L^2_P} per eps
  double micro_slope = 0.0;
};
DecayStudy decay_study(const DispersionContext& ctx, const InitialData& data, double eps_macro,
                       const std::vector<double>& macro_times, const std::vector<double>& eps_list, double t_probe,
                       int jobs = 1);

struct HilbertReport {
  double kappa0_extracted = 0.0, kappa1_extracted = 0.0;
  double kappa0 = 0.0, kappa1 = 0.0;
  double constraint_residual = 0.0;  // divergence and Poisson relation of the data
  double gamma_norm = -1.0;          // |Gamma(f0,f0)|, -1 when the backend has none
  double gamma_macro = -1.0;         // |P0 Gamma(f0,f0)|
  std::string note;
};
HilbertReport hilbert_expansion_check(const DispersionContext& ctx, const MacroState& u0, const Vec3& xi);

}  // namespace vpb
