#include "npcvar/conditional_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "npcvar/normal.hpp"

namespace npcvar {

namespace {

double clamp_unit(double u, double lo, double hi) {
  return std::min(std::max(u, lo), hi);
}

}  // namespace

ConditionalLaw::ConditionalLaw(ReturnSeries sample, CopulaDensityFit copula,
                               CdfMode mode, double h0, bool normalize_weights,
                               Exec exec)
    : sample_(std::move(sample)),
      copula_(std::move(copula)),
      mode_(mode),
      h0_(h0),
      normalize_(normalize_weights),
      exec_(exec) {
  const long T = (long)sample_.size();
  if (T < 2) throw std::invalid_argument("ConditionalLaw: window too short");
  if (copula_.source_length() != T) {
    throw std::invalid_argument(
        "ConditionalLaw: copula fit does not match the window");
  }

  if (mode_ == CdfMode::step) {
    h0_ = 0.0;
  } else if (h0_ < 0.0) {
    h0_ = 0.5 * 1.06 * sample_sd(sample_.values()) *
          std::pow((double)T, -0.2);
  }

  sort_idx_.resize(T);
  std::iota(sort_idx_.begin(), sort_idx_.end(), (std::size_t)0);
  std::sort(sort_idx_.begin(), sort_idx_.end(), [&](std::size_t a, std::size_t b) {
    return sample_.values()[a] < sample_.values()[b];
  });
  sorted_.resize(T);
  for (long k = 0; k < T; ++k) sorted_[k] = sample_.values()[sort_idx_[k]];

  // F(X_t) = rank/(T+1) under the count-of-<= rule; ties share the max rank.
  probit_u_.resize(T);
  RescaledEcdf ecdf(sample_);
  for (long t = 0; t < T; ++t) probit_u_[t] = probit(ecdf(sample_.values()[t]));
}

std::vector<double> ConditionalLaw::weights(double x, double* raw_mean) const {
  const std::ptrdiff_t T = (std::ptrdiff_t)sample_.size();
  const double u = clamp_unit(rescaled_ecdf(sample_, x), copula_.clamp_lo(),
                              copula_.clamp_hi());
  const double sx = probit(u);
  const double phix = norm_pdf(sx);

  std::vector<double> w(T);
  if (exec_ == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < T; ++t) {
      const double sy = probit_u_[t];
      w[t] = copula_.evaluate_probit(sx, sy) / (phix * norm_pdf(sy));
    }
  } else {
    for (std::ptrdiff_t t = 0; t < T; ++t) {
      const double sy = probit_u_[t];
      w[t] = copula_.evaluate_probit(sx, sy) / (phix * norm_pdf(sy));
    }
  }

  double sum = 0.0;
  for (double v : w) sum += v;
  if (raw_mean) *raw_mean = sum / (double)T;
  if (normalize_) {
    if (!(sum > 0.0)) {
      throw std::runtime_error("conditional weights: non-positive weight sum");
    }
    const double scale = (double)T / sum;
    for (double& v : w) v *= scale;
  }
  return w;
}

double ConditionalLaw::cdf_with_weights(double y,
                                        const std::vector<double>& w) const {
  const std::size_t T = sample_.size();
  if (w.size() != T) {
    throw std::invalid_argument("cdf_with_weights: weight size mismatch");
  }
  double acc = 0.0;
  if (mode_ == CdfMode::step) {
    for (std::size_t t = 0; t < T; ++t) {
      if (sample_.values()[t] <= y) acc += w[t];
    }
  } else {
    for (std::size_t t = 0; t < T; ++t) {
      acc += w[t] * norm_cdf((y - sample_.values()[t]) / h0_);
    }
  }
  const double f = acc / (double)T;
  return std::min(std::max(f, 0.0), 1.0);
}

double ConditionalLaw::cdf(double y, double x) const {
  return cdf_with_weights(y, weights(x));
}

double ConditionalLaw::cvar_with_weights(double alpha,
                                         const std::vector<double>& w) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("cvar: alpha must lie in (0,1)");
  }
  const std::size_t T = sample_.size();
  if (w.size() != T) {
    throw std::invalid_argument("cvar_with_weights: weight size mismatch");
  }

  if (mode_ == CdfMode::step) {
    // Atoms in ascending order; ties grouped so F jumps by their total mass.
    double cum = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
      cum += w[sort_idx_[k]];
      const bool group_end = (k + 1 == T) || (sorted_[k + 1] > sorted_[k]);
      if (group_end && cum / (double)T >= alpha) return sorted_[k];
    }
    return sorted_.back();
  }

  double lo = sorted_.front() - 10.0 * h0_;
  double hi = sorted_.back() + 10.0 * h0_;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double f = cdf_with_weights(mid, w);
    if (std::fabs(f - alpha) <= 1e-8 || (hi - lo) <= 1e-12) return mid;
    if (f < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

double ConditionalLaw::cvar(double x, double alpha) const {
  return cvar_with_weights(alpha, weights(x));
}

EsEstimate ConditionalLaw::ces(double x, double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("ces: alpha must lie in (0,1)");
  }
  const std::vector<double> w = weights(x);
  const double v = cvar_with_weights(alpha, w);

  const std::size_t T = sample_.size();
  double tail = 0.0;
  bool any = false;
  for (std::size_t t = 0; t < T; ++t) {
    const double xt = sample_.values()[t];
    if (xt > v) {
      tail += (xt - v) * w[t];
      any = true;
    }
  }
  EsEstimate out;
  if (!any) {
    out.value = v;
    out.empty_tail = true;
    return out;
  }
  out.value = v + tail / ((1.0 - alpha) * (double)T);
  out.empty_tail = false;
  return out;
}

double ConditionalLaw::conditional_density(
    double y, double x, const MarginalDensityFit& marginal) const {
  const double lo = copula_.clamp_lo();
  const double hi = copula_.clamp_hi();
  const double u = clamp_unit(rescaled_ecdf(sample_, x), lo, hi);
  const double v = clamp_unit(rescaled_ecdf(sample_, y), lo, hi);
  return copula_.evaluate(u, v) * marginal(y);
}

}  // namespace npcvar
