#pragma once

#include <vector>

#include "npcvar/exec.hpp"
#include "npcvar/local_likelihood.hpp"
#include "npcvar/return_series.hpp"

namespace npcvar {

// Rescaled empirical distribution function F(x) = (1/(T+1)) * #{X_t <= x},
// bounded by T/(T+1) < 1. Kept sorted for O(log T) evaluation.
class RescaledEcdf {
 public:
  explicit RescaledEcdf(const ReturnSeries& series);
  double operator()(double x) const;
  long source_length() const { return (long)sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

// One-shot form of the rescaled ECDF.
double rescaled_ecdf(const ReturnSeries& series, double x);

// Lag-1 pairs mapped through the rescaled ECDF, plus their probit images.
// Ties share the maximal rank (count-of-<= rule), so every coordinate lies
// in [1/(T+1), T/(T+1)].
struct PseudoSample {
  std::vector<double> u, v;    // (F(X_{t-1}), F(X_t)), t = 1..T-1
  std::vector<double> su, sv;  // probit images
  long source_length = 0;      // T

  std::size_t size() const { return u.size(); }
};

// Throws std::invalid_argument for T < 3 and a degenerate-sample error when
// all values coincide (ranks undefined up to ties).
PseudoSample pseudo_observations(const ReturnSeries& series);

// Univariate local log-quadratic density estimate, evaluated lazily.
class MarginalDensityFit {
 public:
  MarginalDensityFit(std::vector<double> xs, double bandwidth,
                     loclik::NewtonSettings settings, bool widened);

  double operator()(double x) const;
  double bandwidth() const { return h_; }
  bool bandwidth_widened() const { return widened_; }
  loclik::DiagnosticsSnapshot diagnostics() const;

 private:
  std::vector<double> xs_;
  double h_;
  loclik::NewtonSettings settings_;
  bool widened_;
  mutable loclik::FitDiagnostics diag_;
};

struct MarginalFitConfig {
  std::vector<double> cv_grid;  // bandwidth multipliers on the sample sd
  loclik::NewtonSettings newton;

  MarginalFitConfig();
};

// Bandwidth chosen by leave-one-out likelihood cross-validation over
// cv_grid * sd(X). Below 30 observations the largest grid bandwidth is used
// and the fit is flagged as widened.
MarginalDensityFit fit_marginal_density(const ReturnSeries& series,
                                        const MarginalFitConfig& config = {},
                                        Exec exec = Exec::openmp);

}  // namespace npcvar
