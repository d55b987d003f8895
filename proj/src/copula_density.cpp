#include "npcvar/copula_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "npcvar/normal.hpp"

namespace npcvar {

CopulaDensityFit::CopulaDensityFit(std::vector<double> su,
                                   std::vector<double> sv, long source_length,
                                   double h, double hx, double hy,
                                   loclik::NewtonSettings newton,
                                   bool bandwidth_widened)
    : su_(std::move(su)),
      sv_(std::move(sv)),
      source_length_(source_length),
      h_(h),
      hx_(hx),
      hy_(hy),
      newton_(newton),
      widened_(bandwidth_widened) {
  if (su_.size() != sv_.size() || su_.empty()) {
    throw std::invalid_argument("CopulaDensityFit: inconsistent probit sample");
  }
}

double CopulaDensityFit::evaluate_probit(double sx, double sy) const {
  const double g =
      loclik::fit_local_logpoly_2d(su_, sv_, sx, sy, hx_, hy_, newton_, -1, &diag_)
          .density;
  return g;
}

double CopulaDensityFit::evaluate(double u, double v) const {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    throw std::domain_error("copula density: (u,v) must lie in (0,1)^2");
  }
  const double sx = probit(u);
  const double sy = probit(v);
  const double g = evaluate_probit(sx, sy);
  return g / (norm_pdf(sx) * norm_pdf(sy));
}

loclik::DiagnosticsSnapshot CopulaDensityFit::diagnostics() const {
  return {diag_.quadratic.load(), diag_.linear.load(), diag_.floored.load()};
}

namespace {

void check_grid(const SmoothingConfig& config) {
  if (config.cv_grid.empty()) {
    throw std::invalid_argument("SmoothingConfig: cv_grid must be nonempty");
  }
  for (double h : config.cv_grid) {
    if (!(h > 0.0)) {
      throw std::invalid_argument("SmoothingConfig: cv_grid members must be > 0");
    }
  }
}

std::pair<double, double> kernel_scales_for(const PseudoSample& pseudo,
                                            const SmoothingConfig& config,
                                            double h) {
  if (config.bandwidth_policy == BandwidthPolicy::spherical) {
    return {h, h};
  }
  const double sdx = sample_sd(pseudo.su);
  const double sdy = sample_sd(pseudo.sv);
  if (!(sdx > 0.0) || !(sdy > 0.0)) {
    // Degenerate probit sample (e.g. constant coordinate): fall back to the
    // unit probit scale so evaluation stays defined.
    return {h, h};
  }
  return {h * sdx, h * sdy};
}

double loo_log_score_2d(const PseudoSample& pseudo, double hx, double hy,
                        const loclik::NewtonSettings& settings, Exec exec) {
  const std::ptrdiff_t n = (std::ptrdiff_t)pseudo.size();
  std::vector<double> logs(n);
  if (exec == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double g = loclik::fit_local_logpoly_2d(pseudo.su, pseudo.sv,
                                                    pseudo.su[i], pseudo.sv[i],
                                                    hx, hy, settings, i)
                           .density;
      logs[i] = std::log(std::max(g, loclik::kDensityFloor));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double g = loclik::fit_local_logpoly_2d(pseudo.su, pseudo.sv,
                                                    pseudo.su[i], pseudo.sv[i],
                                                    hx, hy, settings, i)
                           .density;
      logs[i] = std::log(std::max(g, loclik::kDensityFloor));
    }
  }
  double s = 0.0;
  for (double v : logs) s += v;
  return s;
}

}  // namespace

std::vector<double> bandwidth_cv_scores(const PseudoSample& pseudo,
                                        const SmoothingConfig& config,
                                        Exec exec) {
  check_grid(config);
  std::vector<double> scores;
  scores.reserve(config.cv_grid.size());
  for (double h : config.cv_grid) {
    const auto [hx, hy] = kernel_scales_for(pseudo, config, h);
    scores.push_back(loo_log_score_2d(pseudo, hx, hy, config.newton, exec));
  }
  return scores;
}

double select_bandwidth(const PseudoSample& pseudo,
                        const SmoothingConfig& config, Exec exec) {
  const std::vector<double> scores = bandwidth_cv_scores(pseudo, config, exec);

  // Scan candidates in increasing bandwidth order; strict improvement is
  // required to move, so ties resolve to the smaller h.
  std::vector<std::size_t> order(config.cv_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.cv_grid[a] < config.cv_grid[b];
  });

  double best_h = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t idx : order) {
    const double s = scores[idx];
    if (std::isfinite(s) && s > best_score) {
      best_score = s;
      best_h = config.cv_grid[idx];
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error(
        "select_bandwidth: all candidates scored non-finite; widen cv_grid");
  }
  return best_h;
}

CopulaDensityFit fit_lltkde2_with_bandwidth(const PseudoSample& pseudo,
                                            const SmoothingConfig& config,
                                            double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("fit_lltkde2: bandwidth must be > 0");
  }
  if (pseudo.size() < 2) {
    throw std::invalid_argument("fit_lltkde2: need at least 2 pseudo pairs");
  }
  const auto [hx, hy] = kernel_scales_for(pseudo, config, h);
  const bool widened = pseudo.size() < 30;
  return CopulaDensityFit(pseudo.su, pseudo.sv, pseudo.source_length, h, hx, hy,
                          config.newton, widened);
}

CopulaDensityFit fit_lltkde2(const PseudoSample& pseudo,
                             const SmoothingConfig& config, Exec exec) {
  check_grid(config);
  if (pseudo.size() < 30) {
    // Too few pairs for stable cross-validation: use the widest bandwidth.
    const double h = *std::max_element(config.cv_grid.begin(), config.cv_grid.end());
    return fit_lltkde2_with_bandwidth(pseudo, config, h);
  }
  const double h = select_bandwidth(pseudo, config, exec);
  return fit_lltkde2_with_bandwidth(pseudo, config, h);
}

}  // namespace npcvar
