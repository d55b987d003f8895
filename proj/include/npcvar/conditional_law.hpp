#pragma once

#include <vector>

#include "npcvar/copula_density.hpp"
#include "npcvar/exec.hpp"
#include "npcvar/marginal.hpp"
#include "npcvar/return_series.hpp"

namespace npcvar {

enum class CdfMode { step, smoothed };

struct EsEstimate {
  double value = 0.0;
  bool empty_tail = false;  // no sample point exceeded the cVaR estimate
};

// Conditional distribution of the next loss given the previous one, built
// from the fitted copula density and the learning window:
//   F(y|x) = (1/T) sum_t w_t(x) * S((y - X_t)/h0),
// with w_t(x) = c(F(x), F(X_t)), S the indicator (step mode) or the
// integrated Gaussian kernel (smoothed mode). Weights are normalised to sum
// to T by default, which makes F a bona fide distribution function.
// Immutable after construction; evaluations at distinct (x, alpha) are safe
// to run in parallel.
class ConditionalLaw {
 public:
  // h0 < 0 selects the normal-reference rule 0.5 * 1.06 * sd * T^(-1/5)
  // (ignored in step mode). The copula fit must come from this window.
  ConditionalLaw(ReturnSeries sample, CopulaDensityFit copula,
                 CdfMode mode = CdfMode::smoothed, double h0 = -1.0,
                 bool normalize_weights = true, Exec exec = Exec::openmp);

  const ReturnSeries& sample() const { return sample_; }
  const CopulaDensityFit& copula() const { return copula_; }
  CdfMode mode() const { return mode_; }
  double h0() const { return h0_; }
  bool normalizes_weights() const { return normalize_; }

  // w_t(x) for t = 0..T-1; raw (pre-normalisation) mean reported through
  // raw_mean when given.
  std::vector<double> weights(double x, double* raw_mean = nullptr) const;

  double cdf(double y, double x) const;
  double cdf_with_weights(double y, const std::vector<double>& w) const;

  // Smallest y with F(y|x) >= alpha. Step mode scans the sorted sample
  // atoms; smoothed mode bisects to |F - alpha| <= 1e-8 or bracket width
  // <= 1e-12.
  double cvar(double x, double alpha) const;
  double cvar_with_weights(double alpha, const std::vector<double>& w) const;

  // Expected shortfall companion; the tail uses the plain indicator even in
  // smoothed mode. Falls back to the cVaR value with the empty_tail flag
  // when no sample point exceeds it.
  EsEstimate ces(double x, double alpha) const;

  // c(F(x), F(y)) * marginal(y); reporting only, not on the cVaR path.
  double conditional_density(double y, double x,
                             const MarginalDensityFit& marginal) const;

 private:
  ReturnSeries sample_;
  CopulaDensityFit copula_;
  CdfMode mode_;
  double h0_;
  bool normalize_;
  Exec exec_;

  std::vector<double> sorted_;         // sample values, ascending
  std::vector<std::size_t> sort_idx_;  // sorted_[k] = values[sort_idx_[k]]
  std::vector<double> probit_u_;       // probit(F(X_t)) per t
};

}  // namespace npcvar
