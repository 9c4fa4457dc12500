#pragma once

#include <string>
#include <vector>

namespace vpb {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// ordinary least squares y = slope x + intercept
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
// slope of log y against log x; all values must be positive
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class DecayModel { poly, exp };

struct DecayFit {
  bool ok = false;
  double rate = 0.0;  // r in (1+t)^{-r} or e^{-rt}
  double r2 = 0.0;
  int samples = 0;
  std::string diagnostic;
};

// Fits the samples with t >= t_start. Refuses fewer than 8 samples, non-positive
// values and tails that grow somewhere.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model,
                   double t_start = 0.0, double monotone_slack = 1e-12);

}  // namespace vpb
