#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "npcvar/exec.hpp"
#include "npcvar/forecast.hpp"
#include "npcvar/return_series.hpp"

namespace npcvar {

enum class InnovationKind { standard_normal, standard_exponential, student_t3 };

// Nonlinear AR(1)-ARCH(1) benchmark model
//   X_t = a + b X_{t-1} + (sqrt(2)/X_{t-1}) phi_{c,d}(X_{t-1})
//         + sqrt(omega + arch_alpha X_{t-1}^2) eps_t,
// with the bump term defined as 0 at X_{t-1} = 0.
struct SimModelParams {
  double a = 0.4;
  double b = 0.3;
  double c = 1.657;
  double d = 0.1175;
  double omega = 0.007;
  double arch_alpha = 0.2;
  double x0 = 1.0;
};

// Deterministic uniform source with splittable substreams, so parallel
// replications are reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng substream(std::uint64_t base_seed, std::uint64_t index);
  double uniform01();  // strictly inside (0,1)

 private:
  std::mt19937_64 engine_;
};

double innovation_cdf(InnovationKind kind, double x);

// Quantile of the innovation law: normal via probit, exponential closed form,
// Student-t3 by bisection against its closed-form CDF. Accurate to 1e-8.
double innovation_quantile(InnovationKind kind, double p);

double sample_innovation(InnovationKind kind, Rng& rng);

// Simulates T steps seeded from params.x0; deterministic given seed. Aborts
// with the step index if the state leaves the finite range.
ReturnSeries simulate(const SimModelParams& params, InnovationKind kind, long T,
                      std::uint64_t seed);

// Analytic one-step-ahead conditional VaR of the model.
double true_cvar(const SimModelParams& params, InnovationKind kind, double x,
                 double alpha);

struct MseLevelResult {
  double level = 0.0;
  double mse = 0.0;
  long n_forecasts = 0;
  long n_skipped = 0;
};

struct MseExperimentResult {
  std::vector<MseLevelResult> per_level;
  std::vector<ForecastRecord> trace;
  ReturnSeries series;
};

// Generates a series, runs the rolling protocol, and scores each forecast
// against the analytic conditional VaR. Window failures are skipped and
// counted, never silently averaged.
MseExperimentResult mse_experiment(const SimModelParams& params,
                                   InnovationKind kind,
                                   const std::vector<double>& levels,
                                   long T_total, int window,
                                   const Forecaster& forecaster,
                                   std::uint64_t seed,
                                   Exec exec = Exec::openmp,
                                   int refit_every = 21);

}  // namespace npcvar
