#include "npcvar/dknw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "npcvar/backtesting.hpp"
#include "npcvar/normal.hpp"

namespace npcvar {

namespace {

constexpr double kDenFloor = 1e-300;

// Kernel weights on the conditioning variable for each lag pair, optionally
// excluding one pair (leave-one-out).
double pair_weights(const ReturnSeries& series, double h, double x,
                    std::ptrdiff_t exclude, std::vector<double>* w) {
  const std::size_t T = series.size();
  w->assign(T - 1, 0.0);
  double den = 0.0;
  for (std::size_t t = 1; t < T; ++t) {
    if ((std::ptrdiff_t)(t - 1) == exclude) continue;
    const double z = (x - series.values()[t - 1]) / h;
    const double kw = std::exp(-0.5 * z * z);
    (*w)[t - 1] = kw;
    den += kw;
  }
  return den;
}

double cdf_from_weights(const ReturnSeries& series, const std::vector<double>& w,
                        double den, double h0, double y) {
  const std::size_t T = series.size();
  double num = 0.0;
  if (h0 > 0.0) {
    for (std::size_t t = 1; t < T; ++t) {
      if (w[t - 1] == 0.0) continue;
      num += w[t - 1] * norm_cdf((y - series.values()[t]) / h0);
    }
  } else {
    for (std::size_t t = 1; t < T; ++t) {
      if (series.values()[t] <= y) num += w[t - 1];
    }
  }
  const double f = num / den;
  return std::min(std::max(f, 0.0), 1.0);
}

double quantile_from_weights(const ReturnSeries& series,
                             const std::vector<double>& w, double den,
                             double h0, double alpha) {
  const auto& xs = series.values();
  const auto [mn, mx] = std::minmax_element(xs.begin() + 1, xs.end());

  if (h0 <= 0.0) {
    // Atom scan over the sorted successor values.
    std::vector<std::size_t> idx(xs.size() - 1);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return xs[a + 1] < xs[b + 1];
    });
    double cum = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      cum += w[idx[k]];
      const bool group_end =
          (k + 1 == idx.size()) || (xs[idx[k + 1] + 1] > xs[idx[k] + 1]);
      if (group_end && cum / den >= alpha) return xs[idx[k] + 1];
    }
    return *mx;
  }

  double lo = *mn - 10.0 * h0;
  double hi = *mx + 10.0 * h0;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double f = cdf_from_weights(series, w, den, h0, mid);
    if (std::fabs(f - alpha) <= 1e-8 || (hi - lo) <= 1e-12) return mid;
    if (f < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

void check_config(const DknwConfig& config) {
  if (!(config.h > 0.0)) {
    throw std::invalid_argument("dknw: conditioning bandwidth h must be > 0");
  }
  if (config.h0 < 0.0) {
    throw std::invalid_argument("dknw: smoothing bandwidth h0 must be >= 0");
  }
}

}  // namespace

double dknw_cdf(const ReturnSeries& series, const DknwConfig& config, double y,
                double x) {
  check_config(config);
  if (series.size() < 2) throw std::invalid_argument("dknw: need T >= 2");
  std::vector<double> w;
  const double den = pair_weights(series, config.h, x, -1, &w);
  if (den < kDenFloor) {
    throw std::runtime_error("dknw: no local data near conditioning value");
  }
  return cdf_from_weights(series, w, den, config.h0, y);
}

double dknw_cvar(const ReturnSeries& series, const DknwConfig& config, double x,
                 double alpha) {
  check_config(config);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("dknw_cvar: alpha must lie in (0,1)");
  }
  if (series.size() < 2) throw std::invalid_argument("dknw: need T >= 2");
  std::vector<double> w;
  const double den = pair_weights(series, config.h, x, -1, &w);
  if (den < kDenFloor) {
    throw std::runtime_error("dknw: no local data near conditioning value");
  }
  return quantile_from_weights(series, w, den, config.h0, alpha);
}

DknwConfig dknw_select_bandwidths(const ReturnSeries& series, double level,
                                  std::vector<double> h_grid, Exec exec) {
  const std::size_t T = series.size();
  if (T < 50) {
    throw std::invalid_argument("dknw_select_bandwidths: need T >= 50");
  }
  const double sd = sample_sd(series.values());
  if (!(sd > 0.0)) {
    throw std::invalid_argument("dknw_select_bandwidths: degenerate series");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("dknw_select_bandwidths: level must lie in (0,1)");
  }

  const double h_ref = 1.06 * sd * std::pow((double)T, -0.2);
  if (h_grid.empty()) {
    for (double m : {0.25, 0.4, 0.63, 1.0, 1.6, 2.5, 4.0}) {
      h_grid.push_back(m * h_ref);
    }
  }
  std::sort(h_grid.begin(), h_grid.end());

  DknwConfig config;
  config.h0 = 0.5 * 1.06 * sd * std::pow((double)T, -0.2);

  const std::ptrdiff_t n_pairs = (std::ptrdiff_t)T - 1;
  double best_loss = std::numeric_limits<double>::infinity();
  double best_h = 0.0;
  for (double h : h_grid) {
    if (!(h > 0.0)) {
      throw std::invalid_argument("dknw_select_bandwidths: grid members must be > 0");
    }
    std::vector<double> losses(n_pairs, 0.0);
    if (exec == Exec::openmp) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t t = 0; t < n_pairs; ++t) {
        std::vector<double> w;
        const double den =
            pair_weights(series, h, series.values()[t], t, &w);
        if (den < kDenFloor) {
          losses[t] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const double q = quantile_from_weights(series, w, den, config.h0, level);
        losses[t] = quantile_loss(series.values()[t + 1], q, level);
      }
    } else {
      for (std::ptrdiff_t t = 0; t < n_pairs; ++t) {
        std::vector<double> w;
        const double den =
            pair_weights(series, h, series.values()[t], t, &w);
        if (den < kDenFloor) {
          losses[t] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const double q = quantile_from_weights(series, w, den, config.h0, level);
        losses[t] = quantile_loss(series.values()[t + 1], q, level);
      }
    }
    double total = 0.0;
    long used = 0;
    for (double l : losses) {
      if (std::isfinite(l)) {
        total += l;
        ++used;
      }
    }
    if (used == 0) continue;
    const double mean_loss = total / (double)used;
    if (mean_loss < best_loss) {
      best_loss = mean_loss;
      best_h = h;
    }
  }
  if (!(best_h > 0.0)) {
    throw std::runtime_error(
        "dknw_select_bandwidths: no usable bandwidth candidate");
  }
  config.h = best_h;
  return config;
}

}  // namespace npcvar
