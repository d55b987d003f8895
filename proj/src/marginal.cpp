#include "npcvar/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "npcvar/normal.hpp"

namespace npcvar {

RescaledEcdf::RescaledEcdf(const ReturnSeries& series)
    : sorted_(series.values()) {
  if (sorted_.empty()) {
    throw std::invalid_argument("rescaled_ecdf: empty series");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double RescaledEcdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  const double count = (double)(it - sorted_.begin());
  return count / (double)(sorted_.size() + 1);
}

double rescaled_ecdf(const ReturnSeries& series, double x) {
  if (series.empty()) {
    throw std::invalid_argument("rescaled_ecdf: empty series");
  }
  long count = 0;
  for (double v : series.values()) {
    if (v <= x) ++count;
  }
  return (double)count / (double)(series.size() + 1);
}

PseudoSample pseudo_observations(const ReturnSeries& series) {
  const long T = (long)series.size();
  if (T < 3) {
    throw std::invalid_argument("pseudo_observations: need T >= 3");
  }
  const auto& xs = series.values();
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  if (*mn == *mx) {
    throw std::invalid_argument(
        "pseudo_observations: degenerate sample, all values identical");
  }

  RescaledEcdf ecdf(series);
  PseudoSample out;
  out.source_length = T;
  out.u.reserve(T - 1);
  out.v.reserve(T - 1);
  out.su.reserve(T - 1);
  out.sv.reserve(T - 1);
  for (long t = 1; t < T; ++t) {
    const double u = ecdf(xs[t - 1]);
    const double v = ecdf(xs[t]);
    out.u.push_back(u);
    out.v.push_back(v);
    out.su.push_back(probit(u));
    out.sv.push_back(probit(v));
  }
  return out;
}

MarginalDensityFit::MarginalDensityFit(std::vector<double> xs, double bandwidth,
                                       loclik::NewtonSettings settings,
                                       bool widened)
    : xs_(std::move(xs)), h_(bandwidth), settings_(settings), widened_(widened) {}

double MarginalDensityFit::operator()(double x) const {
  return loclik::fit_local_logpoly_1d(xs_, x, h_, settings_, -1, &diag_).density;
}

loclik::DiagnosticsSnapshot MarginalDensityFit::diagnostics() const {
  return {diag_.quadratic.load(), diag_.linear.load(), diag_.floored.load()};
}

MarginalFitConfig::MarginalFitConfig()
    : cv_grid{0.3, 0.45, 0.65, 1.0, 1.5, 2.2, 3.2} {}

namespace {

double loo_log_score_1d(const std::vector<double>& xs, double h,
                        const loclik::NewtonSettings& settings, Exec exec) {
  const std::ptrdiff_t n = (std::ptrdiff_t)xs.size();
  std::vector<double> logs(n);
  if (exec == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double d =
          loclik::fit_local_logpoly_1d(xs, xs[i], h, settings, i).density;
      logs[i] = std::log(std::max(d, loclik::kDensityFloor));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double d =
          loclik::fit_local_logpoly_1d(xs, xs[i], h, settings, i).density;
      logs[i] = std::log(std::max(d, loclik::kDensityFloor));
    }
  }
  double s = 0.0;
  for (double v : logs) s += v;
  return s;
}

}  // namespace

MarginalDensityFit fit_marginal_density(const ReturnSeries& series,
                                        const MarginalFitConfig& config,
                                        Exec exec) {
  if (config.cv_grid.empty()) {
    throw std::invalid_argument("fit_marginal_density: empty cv_grid");
  }
  const auto& xs = series.values();
  const double sd = sample_sd(xs);
  if (!(sd > 0.0)) {
    throw std::invalid_argument("fit_marginal_density: degenerate sample");
  }

  if (series.size() < 30) {
    const double h = config.cv_grid.back() * sd;
    return MarginalDensityFit(xs, h, config.newton, /*widened=*/true);
  }

  double best_h = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (double m : config.cv_grid) {
    const double score = loo_log_score_1d(xs, m * sd, config.newton, exec);
    if (std::isfinite(score) && score > best_score) {
      best_score = score;
      best_h = m * sd;
    }
  }
  if (!(best_h > 0.0)) {
    throw std::runtime_error(
        "fit_marginal_density: no finite cross-validation score; widen cv_grid");
  }
  return MarginalDensityFit(xs, best_h, config.newton, /*widened=*/false);
}

}  // namespace npcvar
