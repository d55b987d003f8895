#pragma once

#include <vector>

#include "npcvar/exec.hpp"
#include "npcvar/return_series.hpp"

namespace npcvar {

// Double-kernel Nadaraya-Watson configuration. h0 = 0 degenerates to the
// plain NW indicator form.
struct DknwConfig {
  double h = 0.0;   // conditioning bandwidth, > 0
  double h0 = 0.0;  // smoothing bandwidth, >= 0
};

// F(y|x) = sum_t K_h(x - X_{t-1}) S((y - X_t)/h0) / sum_t K_h(x - X_{t-1}),
// Gaussian kernel, sums over the T-1 lag pairs. Throws a no-local-data error
// when the denominator vanishes (x far outside the data).
double dknw_cdf(const ReturnSeries& series, const DknwConfig& config, double y,
                double x);

// Generalised inverse of dknw_cdf in y, by atom scan (h0 = 0) or bisection
// to |F - alpha| <= 1e-8 / bracket width <= 1e-12.
double dknw_cvar(const ReturnSeries& series, const DknwConfig& config, double x,
                 double alpha);

// h by leave-one-out cross-validation of the pinball loss of the implied
// conditional quantile at `level`, over a log-spaced grid around the normal
// reference bandwidth; h0 by the same normal-reference rule the conditional
// law uses. Empty grid = the default grid.
DknwConfig dknw_select_bandwidths(const ReturnSeries& series,
                                  double level = 0.95,
                                  std::vector<double> h_grid = {},
                                  Exec exec = Exec::openmp);

}  // namespace npcvar
