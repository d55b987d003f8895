#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "npcvar/exec.hpp"
#include "npcvar/local_likelihood.hpp"
#include "npcvar/marginal.hpp"

namespace npcvar {

enum class BandwidthPolicy {
  spherical,                // kernel sd = h on both probit axes
  diagonal_scaled_by_sd,    // kernel sd = h * per-axis sample sd
};

struct SmoothingConfig {
  BandwidthPolicy bandwidth_policy = BandwidthPolicy::diagonal_scaled_by_sd;
  std::vector<double> cv_grid{0.3, 0.45, 0.65, 1.0, 1.5, 2.2, 3.2};
  loclik::NewtonSettings newton;
};

// Fitted LLTKDE2 surface: local log-quadratic density estimate of the probit
// transformed pairs, back-transformed to the unit square as
//   c(u,v) = g(probit(u), probit(v)) / (phi(probit(u)) * phi(probit(v))).
// No surface is precomputed; every evaluation solves the local likelihood at
// the query point. Immutable and safe to share across threads.
class CopulaDensityFit {
 public:
  CopulaDensityFit(std::vector<double> su, std::vector<double> sv,
                   long source_length, double h, double hx, double hy,
                   loclik::NewtonSettings newton, bool bandwidth_widened);

  // Copula density at (u,v) in (0,1)^2; strictly positive. Throws
  // std::domain_error outside the open square. Callers are expected to clamp
  // queries to [clamp_lo(), clamp_hi()]^2 (the density may be unbounded in
  // the corners).
  double evaluate(double u, double v) const;

  // Probit-scale density g(sx, sy); used internally and by the weight kernels
  // which precompute their probit coordinates.
  double evaluate_probit(double sx, double sy) const;

  double bandwidth() const { return h_; }
  std::pair<double, double> kernel_scales() const { return {hx_, hy_}; }
  long source_length() const { return source_length_; }
  std::size_t pair_count() const { return su_.size(); }
  bool bandwidth_widened() const { return widened_; }
  double clamp_lo() const { return 1.0 / (double)(source_length_ + 1); }
  double clamp_hi() const {
    return (double)source_length_ / (double)(source_length_ + 1);
  }
  loclik::DiagnosticsSnapshot diagnostics() const;

 private:
  std::vector<double> su_, sv_;
  long source_length_;
  double h_;        // selected bandwidth multiplier
  double hx_, hy_;  // kernel standard deviations on the probit scale
  loclik::NewtonSettings newton_;
  bool widened_;
  mutable loclik::FitDiagnostics diag_;
};

// Leave-one-out log-likelihood score of the probit-scale estimator for each
// cv_grid candidate (higher is better). Exposed for tests and benchmarks;
// serial and openmp policies produce bit-identical scores.
std::vector<double> bandwidth_cv_scores(const PseudoSample& pseudo,
                                        const SmoothingConfig& config,
                                        Exec exec = Exec::openmp);

// The cv_grid member maximising the leave-one-out log-likelihood; ties go to
// the smaller bandwidth. Throws when no candidate scores finite.
double select_bandwidth(const PseudoSample& pseudo,
                        const SmoothingConfig& config,
                        Exec exec = Exec::openmp);

// Full fit: bandwidth by cross-validation (fewer than 30 pairs: largest grid
// member, flagged), evaluation machinery stored lazily.
CopulaDensityFit fit_lltkde2(const PseudoSample& pseudo,
                             const SmoothingConfig& config = {},
                             Exec exec = Exec::openmp);

// Fit with a bandwidth multiplier chosen elsewhere (e.g. cached by the
// rolling forecast engine between re-selections).
CopulaDensityFit fit_lltkde2_with_bandwidth(const PseudoSample& pseudo,
                                            const SmoothingConfig& config,
                                            double h);

}  // namespace npcvar
