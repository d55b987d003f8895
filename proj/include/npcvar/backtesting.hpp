#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "npcvar/forecast_record.hpp"

namespace npcvar {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct CcResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independence_untestable = false;  // no violations in the sequence
};

struct DqResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  int dropped_columns = 0;  // collinear regressors removed
};

struct ViolationSummary {
  std::vector<std::uint8_t> hits;
  double proportion = 0.0;
};

// hit_t = 1{realized > forecast}; error records are not accepted here.
ViolationSummary violation_sequence(std::span<const ForecastRecord> records);

// Kupiec unconditional coverage: likelihood ratio of the observed violation
// frequency against p = 1 - alpha, chi-square(1). 0*log(0) reads as 0.
TestResult kupiec_uc(std::span<const std::uint8_t> hits, double alpha);

// Christoffersen conditional coverage: UC plus the first-order Markov
// independence ratio, chi-square(2).
CcResult christoffersen_cc(std::span<const std::uint8_t> hits, double alpha);

// Engle-Manganelli dynamic quantile test. Demeaned hits regressed on a
// constant, `lags` lagged hits and the contemporaneous forecast;
// chi-square(lags + 2), with collinear columns dropped (df reduced).
DqResult engle_manganelli_dq(std::span<const std::uint8_t> hits,
                             std::span<const double> forecasts, double alpha,
                             int lags = 4);
DqResult engle_manganelli_dq(std::span<const ForecastRecord> records,
                             double alpha, int lags = 4);

// (alpha - 1{realized <= forecast}) * (realized - forecast); nonnegative,
// zero only at realized == forecast.
double quantile_loss(double realized, double forecast, double alpha);

struct LevelBacktest {
  double level = 0.0;
  long n = 0;
  long n_errors = 0;
  long violations = 0;
  double proportion = 0.0;
  TestResult uc;
  CcResult cc;
  DqResult dq;
  double mean_quantile_loss = 0.0;
};

struct BacktestReport {
  std::vector<LevelBacktest> levels;
};

// Groups records by level (error records counted and excluded) and runs the
// full suite per level.
BacktestReport run_backtests(std::span<const ForecastRecord> records,
                             int dq_lags = 4);

}  // namespace npcvar
