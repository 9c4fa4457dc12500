#include "vpb/fit.hpp"

#include <cmath>

#include "vpb/common.hpp"

namespace vpb {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit needs two or more paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("linear_fit: abscissae coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.slope * x[i] - f.intercept;
    sse += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  return f;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw DomainError("loglog_fit: non-positive sample");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return linear_fit(lx, ly);
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model,
                   double t_start, double monotone_slack)
{
  DecayFit out;
  if (t.size() != y.size()) throw DomainError("fit_decay: size mismatch");
  std::vector<double> x, ly;
  double prev = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_start) continue;
    if (!(y[i] > 0)) {
      out.diagnostic = "non-positive sample at t=" + std::to_string(t[i]);
      return out;
    }
    if (!x.empty() && y[i] > prev * (1.0 + monotone_slack)) {
      out.diagnostic = "tail not monotone at t=" + std::to_string(t[i]);
      return out;
    }
    prev = y[i];
    x.push_back(model == DecayModel::poly ? std::log1p(t[i]) : t[i]);
    ly.push_back(std::log(y[i]));
  }
  out.samples = static_cast<int>(x.size());
  if (out.samples < 8) {
    out.diagnostic = "need at least 8 samples past the transient, got " + std::to_string(out.samples);
    return out;
  }
  const LinearFit f = linear_fit(x, ly);
  out.ok = true;
  out.rate = -f.slope;
  out.r2 = f.r2;
  return out;
}

}  // namespace vpb
