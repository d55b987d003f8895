#include <algorithm>
#include <cmath>
#include <random>

#include <stdexcept>

#include "doctest.h"
#include "npcvar/simulation.hpp"
#include "oracles.hpp"

using namespace npcvar;

TEST_CASE("simulation is deterministic under the seed") {
  const SimModelParams params;
  const ReturnSeries a = simulate(params, InnovationKind::student_t3, 500, 77);
  const ReturnSeries b = simulate(params, InnovationKind::student_t3, 500, 77);
  CHECK(a.values() == b.values());
  const ReturnSeries c = simulate(params, InnovationKind::student_t3, 500, 78);
  CHECK(a.values() != c.values());
}

TEST_CASE("drift limit: noise and bump off leaves X_t near a") {
  SimModelParams params;
  params.b = 0.0;
  params.omega = 1e-12;
  params.arch_alpha = 0.0;
  params.x0 = 20.0;  // far from the bump centre c = 1.657
  const ReturnSeries s = simulate(params, InnovationKind::standard_normal, 50, 1);
  for (std::size_t t = 1; t < s.size(); ++t) {
    CHECK(s[t] == doctest::Approx(0.4).epsilon(1e-4));
  }
}

TEST_CASE("innovation quantiles") {
  CHECK(innovation_quantile(InnovationKind::standard_exponential,
                            1.0 - std::exp(-1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(innovation_quantile(InnovationKind::standard_normal, 0.95) ==
        doctest::Approx(1.6448536270).epsilon(1e-8));
  // Frozen from bisection against the closed-form t3 CDF.
  CHECK(innovation_quantile(InnovationKind::student_t3, 0.95) ==
        doctest::Approx(2.3533634348).epsilon(1e-7));
  CHECK_THROWS_AS(innovation_quantile(InnovationKind::student_t3, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(innovation_quantile(InnovationKind::standard_normal, 1.0),
                  std::domain_error);
}

TEST_CASE("innovation quantile inverts the CDF to 1e-8") {
  for (auto kind : {InnovationKind::standard_normal,
                    InnovationKind::standard_exponential,
                    InnovationKind::student_t3}) {
    for (double p = 0.01; p < 1.0; p += 0.0199) {
      const double q = innovation_quantile(kind, p);
      CHECK(std::fabs(innovation_cdf(kind, q) - p) <= 1e-8);
    }
  }
}

TEST_CASE("t3 CDF agrees with quadrature of the t3 density") {
  for (double x : {-3.0, -1.0, 0.0, 0.7, 2.35, 5.0}) {
    const double by_quad =
        0.5 + oracles::adaptive_simpson(oracles::t3_pdf, 0.0, x);
    CHECK(innovation_cdf(InnovationKind::student_t3, x) ==
          doctest::Approx(by_quad).epsilon(1e-9));
  }
}

TEST_CASE("true cvar at the reference point") {
  const SimModelParams params;
  // 0.7 + sqrt(0.207) * z_0.95 + sqrt(2) * phi_{1.657,0.1175}(1); the bump
  // term is ~7.8e-7 here.
  CHECK(true_cvar(params, InnovationKind::standard_normal, 1.0, 0.95) ==
        doctest::Approx(1.4483640).epsilon(1e-5));
}

TEST_CASE("symmetric innovations: alpha = 0.5 gives the conditional median") {
  const SimModelParams params;
  for (double x : {0.3, 1.0, 1.657}) {
    const double median =
        true_cvar(params, InnovationKind::standard_normal, x, 0.5);
    const double z = (x - params.c) / params.d;
    const double bump =
        std::sqrt(2.0) / x * (0.3989422804014327 / params.d) * std::exp(-0.5 * z * z);
    CHECK(median == doctest::Approx(params.a + params.b * x + bump).epsilon(1e-12));
    CHECK(true_cvar(params, InnovationKind::student_t3, x, 0.5) ==
          doctest::Approx(median).epsilon(1e-8));
  }
}

TEST_CASE("true cvar is monotone in alpha") {
  const SimModelParams params;
  for (auto kind : {InnovationKind::standard_normal,
                    InnovationKind::standard_exponential,
                    InnovationKind::student_t3}) {
    double prev = -1e300;
    for (double a = 0.05; a < 1.0; a += 0.05) {
      const double v = true_cvar(params, kind, 0.8, a);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("true cvar matches brute-force one-step transitions") {
  const SimModelParams params;
  std::mt19937_64 eng(4242);
  std::uniform_real_distribution<double> ux(0.3, 1.8);
  std::uniform_real_distribution<double> ua(0.9, 0.99);
  const InnovationKind kinds[3] = {InnovationKind::standard_normal,
                                   InnovationKind::standard_exponential,
                                   InnovationKind::student_t3};
  for (int trial = 0; trial < 3; ++trial) {
    const double x = ux(eng);
    const double alpha = ua(eng);
    const InnovationKind kind = kinds[trial];

    const int n = 200000;
    Rng rng = Rng::substream(99, (std::uint64_t)trial);
    std::vector<double> draws(n);
    const double z = (x - params.c) / params.d;
    const double bump =
        std::sqrt(2.0) / x * (0.3989422804014327 / params.d) * std::exp(-0.5 * z * z);
    const double loc = params.a + params.b * x + bump;
    const double scale = std::sqrt(params.omega + params.arch_alpha * x * x);
    for (auto& d : draws) d = loc + scale * sample_innovation(kind, rng);
    std::sort(draws.begin(), draws.end());
    const double empirical = oracles::sorted_quantile(draws, alpha);

    // Monte-Carlo standard error of the quantile estimator.
    const double truth = true_cvar(params, kind, x, alpha);
    const double eps_q = (truth - loc) / scale;
    double dens = 0.0;
    switch (kind) {
      case InnovationKind::standard_normal:
        dens = oracles::normal_pdf(eps_q);
        break;
      case InnovationKind::standard_exponential:
        dens = std::exp(-eps_q);
        break;
      case InnovationKind::student_t3:
        dens = oracles::t3_pdf(eps_q);
        break;
    }
    const double se =
        std::sqrt(alpha * (1.0 - alpha) / n) / (dens / scale);
    CHECK(std::fabs(empirical - truth) <= 3.0 * se);
  }
}

TEST_CASE("long-run sample mean is self-consistent") {
  const SimModelParams params;
  const ReturnSeries s = simulate(params, InnovationKind::standard_normal, 100000, 7);
  const ReturnSeries big = simulate(params, InnovationKind::standard_normal, 1000000, 8);
  CHECK(std::fabs(sample_mean(s.values()) - sample_mean(big.values())) < 0.05);
}

TEST_CASE("parameter validation and non-finite abort") {
  SimModelParams bad;
  bad.d = 0.0;
  CHECK_THROWS_AS(simulate(bad, InnovationKind::standard_normal, 10, 1),
                  std::invalid_argument);
  bad = SimModelParams{};
  bad.omega = -1.0;
  CHECK_THROWS_AS(simulate(bad, InnovationKind::standard_normal, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate(SimModelParams{}, InnovationKind::standard_normal, 0, 1),
                  std::invalid_argument);
}

namespace {

class OracleForecaster : public Forecaster {
 public:
  OracleForecaster(const SimModelParams& p, InnovationKind k) : params_(p), kind_(k) {}
  std::string name() const override { return "oracle"; }
  SmoothingState select_smoothing(const ReturnSeries&, Exec) const override {
    return {};
  }
  std::vector<double> forecast(const ReturnSeries&, double x,
                               const std::vector<double>& levels,
                               const SmoothingState&) const override {
    std::vector<double> out;
    for (double a : levels) out.push_back(true_cvar(params_, kind_, x, a));
    return out;
  }

 private:
  SimModelParams params_;
  InnovationKind kind_;
};

class ConstantForecaster : public Forecaster {
 public:
  explicit ConstantForecaster(double v) : v_(v) {}
  std::string name() const override { return "constant"; }
  SmoothingState select_smoothing(const ReturnSeries&, Exec) const override {
    return {};
  }
  std::vector<double> forecast(const ReturnSeries&, double,
                               const std::vector<double>& levels,
                               const SmoothingState&) const override {
    return std::vector<double>(levels.size(), v_);
  }

 private:
  double v_;
};

class FlakyForecaster : public Forecaster {
 public:
  std::string name() const override { return "flaky"; }
  SmoothingState select_smoothing(const ReturnSeries&, Exec) const override {
    return {};
  }
  std::vector<double> forecast(const ReturnSeries& window, double,
                               const std::vector<double>& levels,
                               const SmoothingState&) const override {
    if (window.values().back() > 0.8) {
      throw std::runtime_error("synthetic window failure");
    }
    return std::vector<double>(levels.size(), 1.0);
  }
};

}  // namespace

TEST_CASE("mse experiment: the oracle forecaster scores exactly zero") {
  const SimModelParams params;
  const OracleForecaster oracle(params, InnovationKind::standard_normal);
  const auto res = mse_experiment(params, InnovationKind::standard_normal,
                                  {0.95, 0.99}, 400, 100, oracle, 3);
  REQUIRE(res.per_level.size() == 2);
  for (const auto& lr : res.per_level) {
    CHECK(lr.mse == doctest::Approx(0.0));
    CHECK(lr.n_forecasts == 300);
    CHECK(lr.n_skipped == 0);
  }
}

TEST_CASE("mse experiment: constant forecaster matches a direct loop") {
  const SimModelParams params;
  const double y0 = 1.25;
  const ConstantForecaster constant(y0);
  const auto res = mse_experiment(params, InnovationKind::standard_exponential,
                                  {0.95}, 400, 100, constant, 9);

  const auto& xs = res.series.values();
  double acc = 0.0;
  for (long t = 100; t < 400; ++t) {
    const double truth = true_cvar(params, InnovationKind::standard_exponential,
                                   xs[t - 1], 0.95);
    acc += (y0 - truth) * (y0 - truth);
  }
  CHECK(res.per_level[0].mse == doctest::Approx(acc / 300.0).epsilon(1e-12));
}

TEST_CASE("mse experiment: failed windows are skipped and counted") {
  const SimModelParams params;
  const FlakyForecaster flaky;
  const auto res = mse_experiment(params, InnovationKind::standard_normal,
                                  {0.95}, 300, 100, flaky, 5, Exec::serial);
  CHECK(res.per_level[0].n_forecasts + res.per_level[0].n_skipped == 200);
  CHECK(res.per_level[0].n_skipped > 0);
  CHECK(res.per_level[0].n_forecasts > 0);

  // the skipped windows are exactly the error-flagged records, and the MSE
  // averages only the clean ones
  long errors = 0;
  double acc = 0.0;
  for (const auto& r : res.trace) {
    if (r.error) {
      ++errors;
      CHECK(std::isnan(r.forecast));
      continue;
    }
    const double truth = true_cvar(params, InnovationKind::standard_normal,
                                   res.series.values()[r.index - 1], 0.95);
    acc += (r.forecast - truth) * (r.forecast - truth);
  }
  CHECK(errors == res.per_level[0].n_skipped);
  CHECK(res.per_level[0].mse ==
        doctest::Approx(acc / (double)res.per_level[0].n_forecasts));
}
