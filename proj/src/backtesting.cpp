#include "npcvar/backtesting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "npcvar/special_functions.hpp"

namespace npcvar {

namespace {

// x * log(y) with the 0·log0 := 0 convention used throughout the ratios.
double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

double clamp_stat(double s) {
  // Tiny negative values are roundoff; anything worse is a logic error.
  if (s < 0.0 && s > -1e-9) return 0.0;
  return s;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("backtest: alpha must lie in (0,1)");
  }
}

}  // namespace

ViolationSummary violation_sequence(std::span<const ForecastRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("violation_sequence: empty forecast trace");
  }
  ViolationSummary out;
  out.hits.reserve(records.size());
  long k = 0;
  for (const auto& r : records) {
    if (r.error) {
      throw std::invalid_argument(
          "violation_sequence: error records must be filtered out first");
    }
    const std::uint8_t h = r.realized > r.forecast ? 1 : 0;
    out.hits.push_back(h);
    k += h;
  }
  out.proportion = (double)k / (double)records.size();
  return out;
}

TestResult kupiec_uc(std::span<const std::uint8_t> hits, double alpha) {
  check_alpha(alpha);
  const long n = (long)hits.size();
  if (n < 1) throw std::invalid_argument("kupiec_uc: empty hit sequence");
  long k = 0;
  for (auto h : hits) k += h;

  const double p = 1.0 - alpha;
  const double pi_hat = (double)k / (double)n;
  const double l0 = xlogy((double)(n - k), 1.0 - p) + xlogy((double)k, p);
  const double l1 = xlogy((double)(n - k), 1.0 - pi_hat) + xlogy((double)k, pi_hat);

  TestResult out;
  out.statistic = clamp_stat(-2.0 * (l0 - l1));
  out.p_value = chi2_sf(out.statistic, 1);
  return out;
}

CcResult christoffersen_cc(std::span<const std::uint8_t> hits, double alpha) {
  check_alpha(alpha);
  const long n = (long)hits.size();
  if (n < 2) throw std::invalid_argument("christoffersen_cc: need n >= 2");

  long k = 0;
  for (auto h : hits) k += h;
  const TestResult uc = kupiec_uc(hits, alpha);

  CcResult out;
  double lr_ind = 0.0;
  if (k == 0) {
    out.independence_untestable = true;
  } else {
    long n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (long t = 1; t < n; ++t) {
      const int prev = hits[t - 1], cur = hits[t];
      if (prev == 0 && cur == 0) ++n00;
      if (prev == 0 && cur == 1) ++n01;
      if (prev == 1 && cur == 0) ++n10;
      if (prev == 1 && cur == 1) ++n11;
    }
    const double total = (double)(n00 + n01 + n10 + n11);
    const double pi01 = (n00 + n01) > 0 ? (double)n01 / (double)(n00 + n01) : 0.0;
    const double pi11 = (n10 + n11) > 0 ? (double)n11 / (double)(n10 + n11) : 0.0;
    const double pi = (double)(n01 + n11) / total;

    const double l_markov = xlogy((double)n00, 1.0 - pi01) + xlogy((double)n01, pi01) +
                            xlogy((double)n10, 1.0 - pi11) + xlogy((double)n11, pi11);
    const double l_iid = xlogy((double)(n00 + n10), 1.0 - pi) +
                         xlogy((double)(n01 + n11), pi);
    lr_ind = clamp_stat(-2.0 * (l_iid - l_markov));
  }

  out.statistic = clamp_stat(uc.statistic + lr_ind);
  out.p_value = chi2_sf(out.statistic, 2);
  return out;
}

namespace {

// Quadratic form c' G^+ c by symmetrically pivoted Cholesky, dropping
// columns whose pivot falls below tol * max diagonal. Returns the rank.
int pinv_quadratic_form(std::vector<double>& G, std::vector<double>& c, int k,
                        double* form) {
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i;

  double diag_max = 0.0;
  for (int i = 0; i < k; ++i) diag_max = std::max(diag_max, G[i * k + i]);
  const double tol = 1e-10 * std::max(diag_max, 1e-30);

  // In-place pivoted Cholesky: G = L L'.
  int rank = 0;
  for (int j = 0; j < k; ++j) {
    int piv = j;
    double best = G[perm[j] * k + perm[j]];
    for (int i = j + 1; i < k; ++i) {
      const double d = G[perm[i] * k + perm[i]];
      if (d > best) {
        best = d;
        piv = i;
      }
    }
    std::swap(perm[j], perm[piv]);
    if (!(best > tol)) break;

    const int pj = perm[j];
    const double ljj = std::sqrt(best);
    G[pj * k + pj] = ljj;
    for (int i = j + 1; i < k; ++i) {
      const int pi = perm[i];
      double s = G[pi * k + pj];
      for (int m = 0; m < j; ++m) s -= G[pi * k + perm[m]] * G[pj * k + perm[m]];
      G[pi * k + pj] = s / ljj;
      G[pi * k + pi] -= G[pi * k + pj] * G[pi * k + pj];
    }
    ++rank;
  }

  // Solve L y = c_perm over the rank block; the quadratic form is |y|^2.
  double total = 0.0;
  std::vector<double> y(rank, 0.0);
  for (int j = 0; j < rank; ++j) {
    const int pj = perm[j];
    double s = c[pj];
    for (int m = 0; m < j; ++m) s -= G[pj * k + perm[m]] * y[m];
    y[j] = s / G[pj * k + pj];
    total += y[j] * y[j];
  }
  *form = total;
  return rank;
}

}  // namespace

DqResult engle_manganelli_dq(std::span<const std::uint8_t> hits,
                             std::span<const double> forecasts, double alpha,
                             int lags) {
  check_alpha(alpha);
  if (lags < 1) throw std::invalid_argument("dq: lags must be >= 1");
  const long n = (long)hits.size();
  if (forecasts.size() != hits.size()) {
    throw std::invalid_argument("dq: forecasts/hits size mismatch");
  }
  if (n <= lags + 2) {
    throw std::invalid_argument("dq: need n > lags + 2");
  }

  const double p = 1.0 - alpha;
  std::vector<double> demeaned(n);
  for (long t = 0; t < n; ++t) demeaned[t] = (double)hits[t] - p;

  const int k = lags + 2;
  std::vector<double> G(k * k, 0.0);
  std::vector<double> c(k, 0.0);
  std::vector<double> z(k);
  for (long t = lags; t < n; ++t) {
    z[0] = 1.0;
    for (int j = 1; j <= lags; ++j) z[j] = demeaned[t - j];
    z[k - 1] = forecasts[t];
    const double y = demeaned[t];
    for (int a = 0; a < k; ++a) {
      c[a] += z[a] * y;
      for (int b = a; b < k; ++b) G[a * k + b] += z[a] * z[b];
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < a; ++b) G[a * k + b] = G[b * k + a];
  }

  double form = 0.0;
  const int rank = pinv_quadratic_form(G, c, k, &form);
  if (rank == 0) {
    throw std::runtime_error("dq: regressor matrix has rank zero");
  }

  DqResult out;
  out.statistic = clamp_stat(form / (p * (1.0 - p)));
  out.df = rank;
  out.dropped_columns = k - rank;
  out.p_value = chi2_sf(out.statistic, out.df);
  return out;
}

DqResult engle_manganelli_dq(std::span<const ForecastRecord> records,
                             double alpha, int lags) {
  std::vector<std::uint8_t> hits;
  std::vector<double> forecasts;
  hits.reserve(records.size());
  forecasts.reserve(records.size());
  for (const auto& r : records) {
    if (r.error) continue;
    hits.push_back(r.realized > r.forecast ? 1 : 0);
    forecasts.push_back(r.forecast);
  }
  return engle_manganelli_dq(std::span<const std::uint8_t>(hits),
                             std::span<const double>(forecasts), alpha, lags);
}

double quantile_loss(double realized, double forecast, double alpha) {
  const double ind = realized <= forecast ? 1.0 : 0.0;
  return (alpha - ind) * (realized - forecast);
}

BacktestReport run_backtests(std::span<const ForecastRecord> records,
                             int dq_lags) {
  if (records.empty()) {
    throw std::invalid_argument("run_backtests: empty forecast trace");
  }
  std::map<double, std::vector<ForecastRecord>> by_level;
  std::map<double, long> errors;
  for (const auto& r : records) {
    if (r.error) {
      ++errors[r.level];
      continue;
    }
    by_level[r.level].push_back(r);
  }
  if (by_level.empty()) {
    throw std::invalid_argument("run_backtests: no usable forecast records");
  }

  BacktestReport report;
  for (auto& [level, recs] : by_level) {
    LevelBacktest lb;
    lb.level = level;
    lb.n = (long)recs.size();
    lb.n_errors = errors.count(level) ? errors[level] : 0;

    const ViolationSummary vs = violation_sequence(recs);
    lb.violations = (long)std::count(vs.hits.begin(), vs.hits.end(), 1);
    lb.proportion = vs.proportion;
    lb.uc = kupiec_uc(vs.hits, level);
    lb.cc = christoffersen_cc(vs.hits, level);
    lb.dq = engle_manganelli_dq(std::span<const ForecastRecord>(recs), level,
                                dq_lags);
    double loss = 0.0;
    for (const auto& r : recs) loss += quantile_loss(r.realized, r.forecast, level);
    lb.mean_quantile_loss = loss / (double)recs.size();
    report.levels.push_back(std::move(lb));
  }
  return report;
}

}  // namespace npcvar
