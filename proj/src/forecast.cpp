#include "npcvar/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace npcvar {

NpCopForecaster::NpCopForecaster(SmoothingConfig config, CdfMode mode)
    : config_(std::move(config)), mode_(mode) {}

SmoothingState NpCopForecaster::select_smoothing(const ReturnSeries& window,
                                                 Exec exec) const {
  const PseudoSample pseudo = pseudo_observations(window);
  SmoothingState state;
  if (pseudo.size() < 30) {
    state.h_copula =
        *std::max_element(config_.cv_grid.begin(), config_.cv_grid.end());
  } else {
    state.h_copula = select_bandwidth(pseudo, config_, exec);
  }
  return state;
}

std::vector<double> NpCopForecaster::forecast(const ReturnSeries& window,
                                              double x,
                                              const std::vector<double>& levels,
                                              const SmoothingState& state) const {
  if (!(state.h_copula > 0.0)) {
    throw std::runtime_error("npcop: smoothing state not selected");
  }
  const PseudoSample pseudo = pseudo_observations(window);
  CopulaDensityFit fit =
      fit_lltkde2_with_bandwidth(pseudo, config_, state.h_copula);
  // Serial inner evaluation: parallelism lives at the window level.
  ConditionalLaw law(window, std::move(fit), mode_, -1.0, true, Exec::serial);
  const std::vector<double> w = law.weights(x);
  std::vector<double> out;
  out.reserve(levels.size());
  for (double a : levels) out.push_back(law.cvar_with_weights(a, w));
  return out;
}

DknwForecaster::DknwForecaster(double cv_level) : cv_level_(cv_level) {}

SmoothingState DknwForecaster::select_smoothing(const ReturnSeries& window,
                                                Exec exec) const {
  SmoothingState state;
  state.dknw = dknw_select_bandwidths(window, cv_level_, {}, exec);
  return state;
}

std::vector<double> DknwForecaster::forecast(const ReturnSeries& window,
                                             double x,
                                             const std::vector<double>& levels,
                                             const SmoothingState& state) const {
  if (!(state.dknw.h > 0.0)) {
    throw std::runtime_error("dknw: smoothing state not selected");
  }
  std::vector<double> out;
  out.reserve(levels.size());
  for (double a : levels) out.push_back(dknw_cvar(window, state.dknw, x, a));
  return out;
}

std::vector<ForecastRecord> run_forecasts(const ReturnSeries& series,
                                          const WindowPolicy& policy,
                                          const Forecaster& forecaster,
                                          const std::vector<double>& levels,
                                          Exec exec) {
  const long T = (long)series.size();
  const long width = policy.width;
  if (policy.kind == WindowKind::rolling && width < 50) {
    throw std::invalid_argument("run_forecasts: rolling width must be >= 50");
  }
  if (policy.refit_every < 1) {
    throw std::invalid_argument("run_forecasts: refit cadence must be >= 1");
  }
  if (T <= width + 1) {
    throw std::invalid_argument("run_forecasts: series shorter than one window");
  }
  if (levels.empty()) {
    throw std::invalid_argument("run_forecasts: no levels requested");
  }
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::domain_error("run_forecasts: levels must lie in (0,1)");
    }
  }

  const long first = width;  // first forecastable index
  const long n_steps = T - first;
  const long n_levels = (long)levels.size();

  auto window_at = [&](long t) {
    return policy.kind == WindowKind::rolling
               ? series.window((std::size_t)(t - width), (std::size_t)width)
               : series.window(0, (std::size_t)t);
  };

  // Smoothing parameters are re-selected on a fixed schedule so every window
  // maps to a state that is a pure function of the series.
  const long n_buckets = (n_steps + policy.refit_every - 1) / policy.refit_every;
  std::vector<SmoothingState> states(n_buckets);
  std::vector<bool> state_ok(n_buckets, false);
  for (long b = 0; b < n_buckets; ++b) {
    const long t = first + b * policy.refit_every;
    try {
      states[b] = forecaster.select_smoothing(window_at(t), exec);
      state_ok[b] = true;
    } catch (const std::exception&) {
      state_ok[b] = false;
    }
  }

  std::vector<ForecastRecord> records(n_steps * n_levels);
  auto run_one = [&](long step) {
    const long t = first + step;
    const long b = step / policy.refit_every;
    const double x = series.values()[t - 1];
    const double realized = series.values()[t];
    const std::string date =
        series.has_timestamps() ? series.timestamps()[t] : std::string();

    std::vector<double> values;
    bool failed = !state_ok[b];
    if (!failed) {
      try {
        values = forecaster.forecast(window_at(t), x, levels, states[b]);
      } catch (const std::exception&) {
        failed = true;
      }
    }
    for (long j = 0; j < n_levels; ++j) {
      ForecastRecord& r = records[step * n_levels + j];
      r.index = t;
      r.date = date;
      r.level = levels[j];
      r.realized = realized;
      if (failed) {
        r.forecast = std::numeric_limits<double>::quiet_NaN();
        r.hit = false;
        r.error = true;
      } else {
        r.forecast = values[j];
        r.hit = realized > values[j];
        r.error = false;
      }
    }
  };

  if (exec == Exec::openmp) {
#pragma omp parallel for schedule(dynamic)
    for (long step = 0; step < n_steps; ++step) run_one(step);
  } else {
    for (long step = 0; step < n_steps; ++step) run_one(step);
  }
  return records;
}

}  // namespace npcvar
