#include "vpb/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vpb/hash.hpp"

namespace vpb {

ConfigError::ConfigError(int line_, std::string field_, const std::string& what)
    : DomainError((line_ > 0 ? "line " + std::to_string(line_) + ": " : std::string()) + field_ + ": " + what),
      line(line_),
      field(std::move(field_))
{
}

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key)
{
  double d = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), d);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(d))
    throw ConfigError(0, key, "expected a number, got '" + v + "'");
  return d;
}

long long to_int(const std::string& v, const std::string& key)
{
  long long i = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), i);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(0, key, "expected an integer, got '" + v + "'");
  return i;
}

bool to_bool(const std::string& v, const std::string& key)
{
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(0, key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& key)
{
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key));
  if (out.empty()) throw ConfigError(0, key, "empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
  static const std::map<std::string, Setter> m = {
      {"schema", [](auto& c, auto& v, auto& k) { c.schema = static_cast<int>(to_int(v, k)); }},
      {"max_degree", [](auto& c, auto& v, auto& k) { c.max_degree = static_cast<int>(to_int(v, k)); }},
      {"quad_order", [](auto& c, auto& v, auto& k) { c.quad_order = static_cast<int>(to_int(v, k)); }},
      {"backend",
       [](auto& c, auto& v, auto& k) {
         try {
           c.backend = backend_from_string(v);
         } catch (const DomainError& e) {
           throw ConfigError(0, k, e.what());
         }
       }},
      {"kernel_gamma", [](auto& c, auto& v, auto& k) { c.kernel_gamma = to_double(v, k); }},
      {"angular_c", [](auto& c, auto& v, auto& k) { c.angular_c = to_double(v, k); }},
      {"nu_bar", [](auto& c, auto& v, auto& k) { c.nu_bar = to_double(v, k); }},
      {"exactness", [](auto& c, auto& v, auto& k) { c.exactness = static_cast<int>(to_int(v, k)); }},
      {"tol_quad", [](auto& c, auto& v, auto& k) { c.tol_quad = to_double(v, k); }},
      {"s_min", [](auto& c, auto& v, auto& k) { c.s_min = to_double(v, k); }},
      {"s_max", [](auto& c, auto& v, auto& k) { c.s_max = to_double(v, k); }},
      {"s_count", [](auto& c, auto& v, auto& k) { c.s_count = static_cast<int>(to_int(v, k)); }},
      {"s_spacing",
       [](auto& c, auto& v, auto& k) {
         try {
           c.s_spacing = spacing_from_string(v);
         } catch (const DomainError& e) {
           throw ConfigError(0, k, e.what());
         }
       }},
      {"eps_list", [](auto& c, auto& v, auto& k) { c.eps_list = to_list(v, k); }},
      {"t_min", [](auto& c, auto& v, auto& k) { c.t_min = to_double(v, k); }},
      {"t_max", [](auto& c, auto& v, auto& k) { c.t_max = to_double(v, k); }},
      {"t_count", [](auto& c, auto& v, auto& k) { c.t_count = static_cast<int>(to_int(v, k)); }},
      {"t_layer", [](auto& c, auto& v, auto& k) { c.t_layer = static_cast<int>(to_int(v, k)); }},
      {"data",
       [](auto& c, auto& v, auto& k) {
         if (v == "generic")
           c.data = DataKind::generic;
         else if (v == "well_prepared")
           c.data = DataKind::well_prepared;
         else
           throw ConfigError(0, k, "expected generic or well_prepared, got '" + v + "'");
       }},
      {"profile_width", [](auto& c, auto& v, auto& k) { c.profile_width = to_double(v, k); }},
      {"profile_tail", [](auto& c, auto& v, auto& k) { c.profile_tail = to_double(v, k); }},
      {"auto_correct", [](auto& c, auto& v, auto& k) { c.auto_correct = to_bool(v, k); }},
      {"mode_s", [](auto& c, auto& v, auto& k) { c.mode_s = to_double(v, k); }},
      {"mode_eps", [](auto& c, auto& v, auto& k) { c.mode_eps = to_double(v, k); }},
      {"dispersion_s", [](auto& c, auto& v, auto& k) { c.dispersion_s = to_list(v, k); }},
      {"r0", [](auto& c, auto& v, auto& k) { c.r0 = to_double(v, k); }},
      {"r1", [](auto& c, auto& v, auto& k) { c.r1 = to_double(v, k); }},
      {"ode_rtol", [](auto& c, auto& v, auto& k) { c.ode_rtol = to_double(v, k); }},
      {"ode_atol", [](auto& c, auto& v, auto& k) { c.ode_atol = to_double(v, k); }},
      {"seed",
       [](auto& c, auto& v, auto& k) {
         const long long s = to_int(v, k);
         if (s < 0) throw ConfigError(0, k, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"out", [](auto& c, auto& v, auto&) { c.out = v; }},
      {"jobs", [](auto& c, auto& v, auto& k) { c.jobs = static_cast<int>(to_int(v, k)); }},
  };
  return m;
}

void check_eps(double e, const std::string& field)
{
  if (!(e > 0.0 && e < 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", e);
    throw ConfigError(0, field, std::string("eps = ") + buf +
                                    " is outside (0,1); the diffusive scaling is only defined for 0 < eps < 1");
  }
}

}  // namespace

KernelSpec ExperimentConfig::kernel() const
{
  switch (backend) {
    case Backend::hard_sphere: {
      KernelSpec k = KernelSpec::hard_sphere();
      k.angular_c = angular_c;
      return k;
    }
    case Backend::hard_potential: return KernelSpec::hard_potential(kernel_gamma, angular_c);
    case Backend::synthetic: return KernelSpec::synthetic(nu_bar);
  }
  return {};
}

AssemblyOptions ExperimentConfig::assembly() const
{
  AssemblyOptions o;
  o.exactness = exactness;
  o.jobs = jobs;
  o.tol_quad = tol_quad;
  return o;
}

SGrid ExperimentConfig::s_grid() const { return SGrid::make(s_min, s_max, s_count, s_spacing); }

std::vector<double> ExperimentConfig::time_grid() const
{
  double emin = eps_list.front();
  for (double e : eps_list) emin = std::min(emin, e);
  return make_time_grid(emin, t_min, t_max, t_count, t_layer);
}

InitialDataSpec ExperimentConfig::data_spec() const
{
  InitialDataSpec d = data == DataKind::generic ? InitialDataSpec::generic() : InitialDataSpec::well_prepared();
  const double w = profile_width, p = profile_tail;
  d.profile = [w, p](double s) { return std::pow(s, p) * std::exp(-(s / w) * (s / w)); };
  d.auto_correct = auto_correct;
  return d;
}

std::string ExperimentConfig::canonical() const
{
  std::ostringstream os;
  os.precision(17);
  auto list = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  };
  os << "schema=" << schema << "\nmax_degree=" << max_degree << "\nquad_order=" << resolved_quad_order()
     << "\nbackend=" << to_string(backend) << "\nkernel=" << kernel().describe() << "\nexactness=" << exactness
     << "\ntol_quad=" << tol_quad << "\ns_min=" << s_min << "\ns_max=" << s_max << "\ns_count=" << s_count
     << "\ns_spacing=" << to_string(s_spacing) << "\neps_list=";
  list(eps_list);
  os << "\nt_min=" << t_min << "\nt_max=" << t_max << "\nt_count=" << t_count << "\nt_layer=" << t_layer
     << "\ndata=" << to_string(data) << "\nprofile_width=" << profile_width << "\nprofile_tail=" << profile_tail
     << "\nauto_correct=" << auto_correct << "\nmode_s=" << mode_s << "\nmode_eps=" << mode_eps
     << "\ndispersion_s=";
  list(dispersion_s);
  os << "\nr0=" << r0 << "\nr1=" << r1 << "\node_rtol=" << ode_rtol << "\node_atol=" << ode_atol
     << "\nseed=" << seed << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical())); }

void ExperimentConfig::validate() const
{
  if (schema != kConfigSchema)
    throw ConfigError(0, "schema", "unsupported schema " + std::to_string(schema) + " (this build reads " +
                                       std::to_string(kConfigSchema) + ")");
  if (max_degree < 2 || max_degree > 12) throw ConfigError(0, "max_degree", "must lie in [2, 12]");
  if (quad_order != 0 && quad_order < max_degree + 1)
    throw ConfigError(0, "quad_order", "must be 0 (automatic) or at least max_degree + 1");
  if (backend == Backend::hard_potential && !(kernel_gamma >= 0.0 && kernel_gamma < 1.0))
    throw ConfigError(0, "kernel_gamma", "hard potentials need 0 <= gamma < 1");
  if (!(angular_c > 0.0)) throw ConfigError(0, "angular_c", "must be positive");
  if (!(nu_bar > 0.0)) throw ConfigError(0, "nu_bar", "must be positive");
  if (!(tol_quad > 0.0)) throw ConfigError(0, "tol_quad", "must be positive");
  if (!(s_min > 0.0)) throw ConfigError(0, "s_min", "must be positive; xi = 0 carries no mode operator");
  if (!(s_max > s_min)) throw ConfigError(0, "s_max", "must exceed s_min");
  if (s_count < 2) throw ConfigError(0, "s_count", "at least two shells");
  if (eps_list.empty()) throw ConfigError(0, "eps_list", "empty list");
  for (double e : eps_list) check_eps(e, "eps_list");
  check_eps(mode_eps, "mode_eps");
  if (!(t_min > 0.0 && t_max > t_min)) throw ConfigError(0, "t_min", "need 0 < t_min < t_max");
  if (t_count < 2) throw ConfigError(0, "t_count", "at least two times");
  if (t_layer < 0) throw ConfigError(0, "t_layer", "must be non-negative");
  if (!(profile_width > 0.0)) throw ConfigError(0, "profile_width", "must be positive");
  if (profile_tail < 0.0) throw ConfigError(0, "profile_tail", "must be non-negative");
  if (!(mode_s > 0.0)) throw ConfigError(0, "mode_s", "must be positive");
  for (double s : dispersion_s)
    if (!(s > 0.0)) throw ConfigError(0, "dispersion_s", "entries must be positive");
  if (!(r0 > 0.0) || !(r1 > 0.0)) throw ConfigError(0, "r0", "regime radii must be positive");
  if (!(ode_rtol > 0.0) || !(ode_atol > 0.0)) throw ConfigError(0, "ode_rtol", "tolerances must be positive");
  if (jobs < 1) throw ConfigError(0, "jobs", "must be at least 1");
}

ExperimentConfig parse_config(const std::string& text)
{
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, line, "expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(lineno, key, "unknown key");
    if (seen.count(key)) throw ConfigError(lineno, key, "repeated (first on line " + std::to_string(seen[key]) + ")");
    if (val.empty()) throw ConfigError(lineno, key, "missing value");
    seen[key] = lineno;
    try {
      it->second(c, val, key);
    } catch (const ConfigError& e) {
      throw ConfigError(lineno, e.field, std::string(e.what()).substr(e.field.size() + 2));
    }
  }
  if (!seen.count("schema")) throw ConfigError(0, "schema", "missing; add `schema = 1`");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    const auto it = seen.find(e.field);
    if (it == seen.end()) throw;
    throw ConfigError(it->second, e.field, std::string(e.what()).substr(e.field.size() + 2));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace vpb
