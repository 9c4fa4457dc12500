#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpb/collision.hpp"
#include "vpb/limit_lab.hpp"

namespace vpb {

// Problems in a config file. line is 0 when the problem is not tied to one line
// (a missing key or a flag override).
struct ConfigError : DomainError {
  ConfigError(int line, std::string field, const std::string& what);
  int line;
  std::string field;
};

inline constexpr int kConfigSchema = 1;

// One experiment. Text format: `key = value` per line, `#` starts a comment,
// lists are comma separated. `schema = 1` is required; every other key has a default.
struct ExperimentConfig {
  int schema = kConfigSchema;

  // velocity basis and collision model
  int max_degree = 6;
  int quad_order = 0;  // 0: 2 max_degree + 4
  Backend backend = Backend::hard_sphere;
  double kernel_gamma = 1.0;  // hard_potential only
  double angular_c = 1.0;     // C in b(cos theta) <= C |cos theta|
  double nu_bar = 1.0;        // synthetic relaxation rate
  int exactness = -1;
  double tol_quad = 1e-10;

  // radial xi-grid, the upper cutoff is an experiment parameter
  double s_min = 0.05, s_max = 4.0;
  int s_count = 32;
  Spacing s_spacing = Spacing::gauss;

  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};

  // time grid: 0, t_count geometric points in [t_min, t_max], t_layer points in [0, 10 eps_min]
  double t_min = 1e-3, t_max = 20.0;
  int t_count = 40, t_layer = 20;

  // initial data g(s) = s^profile_tail exp(-(s/profile_width)^2) times the shape
  DataKind data = DataKind::well_prepared;
  double profile_width = 1.0;
  double profile_tail = 0.0;
  bool auto_correct = true;

  // single-mode subcommands (spectrum, semigroup) and the dispersion table
  double mode_s = 0.5, mode_eps = 0.1;
  std::vector<double> dispersion_s{0.2, 0.5, 1.0};

  double r0 = 0.3, r1 = 0.1;
  double ode_rtol = 1e-11, ode_atol = 1e-13;
  std::uint64_t seed = 20240917;

  // not part of the hash: they do not change any table
  std::string out = "out";
  int jobs = 1;

  int resolved_quad_order() const { return quad_order > 0 ? quad_order : 2 * max_degree + 4; }
  KernelSpec kernel() const;
  AssemblyOptions assembly() const;
  SGrid s_grid() const;
  std::vector<double> time_grid() const;
  InitialDataSpec data_spec() const;
  Regime regime() const { return {r0, r1}; }

  // canonical text of every hashed field, fixed order and precision
  std::string canonical() const;
  std::string hash() const;

  // throws ConfigError naming the field
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace vpb
