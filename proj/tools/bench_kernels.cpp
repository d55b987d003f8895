// Timing comparison of the OpenMP kernels against their serial reference
// implementations. The serial and parallel paths are required to produce
// bit-identical results; this binary checks that while it times them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "npcvar/conditional_law.hpp"
#include "npcvar/copula_density.hpp"
#include "npcvar/exec.hpp"
#include "npcvar/forecast.hpp"
#include "npcvar/simulation.hpp"

using namespace npcvar;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const char* name, double t_serial, double t_omp, bool identical) {
  std::printf("%-28s serial %8.3fs   openmp %8.3fs   speedup %.2fx   %s\n",
              name, t_serial, t_omp, t_serial / t_omp,
              identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", max_threads());

  const ReturnSeries series =
      simulate(SimModelParams{}, InnovationKind::standard_normal, 1400, 99);

  // 1. bandwidth cross-validation (leave-one-out folds)
  {
    const ReturnSeries window = series.window(0, 800);
    const PseudoSample pseudo = pseudo_observations(window);
    SmoothingConfig config;

    auto t0 = Clock::now();
    const auto s_serial = bandwidth_cv_scores(pseudo, config, Exec::serial);
    const double ts = seconds_since(t0);

    t0 = Clock::now();
    const auto s_omp = bandwidth_cv_scores(pseudo, config, Exec::openmp);
    const double tp = seconds_since(t0);

    report("bandwidth_cv_scores T=800", ts, tp, s_serial == s_omp);
  }

  // 2. conditional weight evaluation over the sample
  {
    const PseudoSample pseudo = pseudo_observations(series);
    SmoothingConfig config;
    CopulaDensityFit fit = fit_lltkde2_with_bandwidth(pseudo, config, 1.0);

    ConditionalLaw law_serial(series, fit, CdfMode::smoothed, -1.0, true,
                              Exec::serial);
    ConditionalLaw law_omp(series, fit, CdfMode::smoothed, -1.0, true,
                           Exec::openmp);
    const double x = series.values().back();

    auto t0 = Clock::now();
    std::vector<double> w_serial;
    for (int rep = 0; rep < 5; ++rep) w_serial = law_serial.weights(x);
    const double ts = seconds_since(t0);

    t0 = Clock::now();
    std::vector<double> w_omp;
    for (int rep = 0; rep < 5; ++rep) w_omp = law_omp.weights(x);
    const double tp = seconds_since(t0);

    report("conditional weights T=1400", ts, tp, w_serial == w_omp);
  }

  // 3. rolling forecast engine
  {
    const ReturnSeries sub = series.window(0, 600);
    WindowPolicy policy;
    NpCopForecaster forecaster;
    const std::vector<double> levels{0.95};

    auto t0 = Clock::now();
    const auto r_serial =
        run_forecasts(sub, policy, forecaster, levels, Exec::serial);
    const double ts = seconds_since(t0);

    t0 = Clock::now();
    const auto r_omp = run_forecasts(sub, policy, forecaster, levels, Exec::openmp);
    const double tp = seconds_since(t0);

    bool identical = r_serial.size() == r_omp.size();
    for (std::size_t i = 0; identical && i < r_serial.size(); ++i) {
      identical = r_serial[i].forecast == r_omp[i].forecast &&
                  r_serial[i].hit == r_omp[i].hit;
    }
    report("run_forecasts T=600", ts, tp, identical);
  }

  return 0;
}
