#include "npcvar/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "npcvar/normal.hpp"

namespace npcvar {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt3 = 1.73205080756887729353;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_params(const SimModelParams& p) {
  if (!(p.d > 0.0)) throw std::invalid_argument("simulate: d must be > 0");
  if (!(p.omega > 0.0)) throw std::invalid_argument("simulate: omega must be > 0");
  if (p.arch_alpha < 0.0) {
    throw std::invalid_argument("simulate: arch_alpha must be >= 0");
  }
}

double bump_term(const SimModelParams& p, double x) {
  if (x == 0.0) return 0.0;  // limit convention; the chain never visits 0
  const double z = (x - p.c) / p.d;
  const double dens = norm_pdf(z) / p.d;
  return kSqrt2 / x * dens;
}

double volatility(const SimModelParams& p, double x) {
  return std::sqrt(p.omega + p.arch_alpha * x * x);
}

double t3_cdf(double x) {
  const double u = x / kSqrt3;
  return 0.5 + (std::atan(u) + u / (1.0 + u * u)) / M_PI;
}

double t3_quantile(double p) {
  // Monotone CDF inversion: expanding bracket, then bisection.
  double lo = -1.0, hi = 1.0;
  while (t3_cdf(lo) > p) lo *= 2.0;
  while (t3_cdf(hi) < p) hi *= 2.0;
  double mid = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double f = t3_cdf(mid);
    if (std::fabs(f - p) <= 1e-14 && iter > 20) break;
    if (hi - lo <= 1e-13 * std::max(1.0, std::fabs(mid))) break;
    if (f < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::substream(std::uint64_t base_seed, std::uint64_t index) {
  return Rng(splitmix64(base_seed + index * 0x9E3779B97F4A7C15ULL));
}

double Rng::uniform01() {
  // 53-bit mantissa shifted into (0,1); never exactly 0 or 1.
  return ((double)(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double innovation_cdf(InnovationKind kind, double x) {
  switch (kind) {
    case InnovationKind::standard_normal:
      return norm_cdf(x);
    case InnovationKind::standard_exponential:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x);
    case InnovationKind::student_t3:
      return t3_cdf(x);
  }
  throw std::logic_error("innovation_cdf: unknown kind");
}

double innovation_quantile(InnovationKind kind, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("innovation_quantile: p must lie in (0,1)");
  }
  switch (kind) {
    case InnovationKind::standard_normal:
      return probit(p);
    case InnovationKind::standard_exponential:
      return -std::log(1.0 - p);
    case InnovationKind::student_t3:
      return t3_quantile(p);
  }
  throw std::logic_error("innovation_quantile: unknown kind");
}

double sample_innovation(InnovationKind kind, Rng& rng) {
  return innovation_quantile(kind, rng.uniform01());
}

ReturnSeries simulate(const SimModelParams& params, InnovationKind kind, long T,
                      std::uint64_t seed) {
  check_params(params);
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");

  Rng rng(seed);
  std::vector<double> xs;
  xs.reserve(T);
  double prev = params.x0;
  for (long t = 1; t <= T; ++t) {
    const double eps = sample_innovation(kind, rng);
    const double x = params.a + params.b * prev + bump_term(params, prev) +
                     volatility(params, prev) * eps;
    if (!std::isfinite(x)) {
      throw std::runtime_error("simulate: non-finite state at step " +
                               std::to_string(t));
    }
    xs.push_back(x);
    prev = x;
  }
  return ReturnSeries(std::move(xs));
}

double true_cvar(const SimModelParams& params, InnovationKind kind, double x,
                 double alpha) {
  check_params(params);
  return params.a + params.b * x + bump_term(params, x) +
         volatility(params, x) * innovation_quantile(kind, alpha);
}

MseExperimentResult mse_experiment(const SimModelParams& params,
                                   InnovationKind kind,
                                   const std::vector<double>& levels,
                                   long T_total, int window,
                                   const Forecaster& forecaster,
                                   std::uint64_t seed, Exec exec,
                                   int refit_every) {
  MseExperimentResult out;
  out.series = simulate(params, kind, T_total, seed);

  WindowPolicy policy;
  policy.kind = WindowKind::rolling;
  policy.width = window;
  policy.refit_every = refit_every;
  out.trace = run_forecasts(out.series, policy, forecaster, levels, exec);

  for (double level : levels) {
    MseLevelResult res;
    res.level = level;
    double acc = 0.0;
    for (const auto& r : out.trace) {
      if (r.level != level) continue;
      if (r.error) {
        ++res.n_skipped;
        continue;
      }
      const double x_prev = out.series.values()[r.index - 1];
      const double truth = true_cvar(params, kind, x_prev, level);
      acc += (r.forecast - truth) * (r.forecast - truth);
      ++res.n_forecasts;
    }
    res.mse = res.n_forecasts > 0 ? acc / (double)res.n_forecasts : 0.0;
    out.per_level.push_back(res);
  }
  return out;
}

}  // namespace npcvar
