#pragma once

#include <string>
#include <vector>

#include "npcvar/conditional_law.hpp"
#include "npcvar/dknw.hpp"
#include "npcvar/exec.hpp"
#include "npcvar/forecast_record.hpp"
#include "npcvar/return_series.hpp"

namespace npcvar {

enum class WindowKind { rolling, expanding };

struct WindowPolicy {
  WindowKind kind = WindowKind::rolling;
  int width = 252;        // rolling width; also the initial expanding window
  int refit_every = 21;   // full bandwidth re-selection cadence (1 = daily)
};

// Smoothing parameters cached between full re-selections; the estimator
// itself is refit on every window.
struct SmoothingState {
  double h_copula = 0.0;
  DknwConfig dknw;
};

// One-step-ahead cVaR forecaster over a learning window. Implementations are
// immutable; select_smoothing and forecast are const so windows can be
// evaluated concurrently.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  virtual SmoothingState select_smoothing(const ReturnSeries& window,
                                          Exec exec) const = 0;
  virtual std::vector<double> forecast(const ReturnSeries& window, double x,
                                       const std::vector<double>& levels,
                                       const SmoothingState& state) const = 0;
};

// The copula-based forecaster: pseudo-observations + LLTKDE2 + conditional
// law, quantiles at the requested levels.
class NpCopForecaster final : public Forecaster {
 public:
  explicit NpCopForecaster(SmoothingConfig config = {},
                           CdfMode mode = CdfMode::smoothed);
  std::string name() const override { return "npcop"; }
  SmoothingState select_smoothing(const ReturnSeries& window,
                                  Exec exec) const override;
  std::vector<double> forecast(const ReturnSeries& window, double x,
                               const std::vector<double>& levels,
                               const SmoothingState& state) const override;

 private:
  SmoothingConfig config_;
  CdfMode mode_;
};

class DknwForecaster final : public Forecaster {
 public:
  explicit DknwForecaster(double cv_level = 0.95);
  std::string name() const override { return "dknw"; }
  SmoothingState select_smoothing(const ReturnSeries& window,
                                  Exec exec) const override;
  std::vector<double> forecast(const ReturnSeries& window, double x,
                               const std::vector<double>& levels,
                               const SmoothingState& state) const override;

 private:
  double cv_level_;
};

// Rolling or expanding one-step-ahead forecasting. The forecast at time t is
// a pure function of X_0..X_{t-1}: the forecaster only ever receives the
// window ending at t-1. Window failures become error records; the run
// continues. Records are ordered by time index then level, independent of
// the execution policy.
std::vector<ForecastRecord> run_forecasts(const ReturnSeries& series,
                                          const WindowPolicy& policy,
                                          const Forecaster& forecaster,
                                          const std::vector<double>& levels,
                                          Exec exec = Exec::openmp);

}  // namespace npcvar
