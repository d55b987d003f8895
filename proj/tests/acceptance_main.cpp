// Acceptance suite. Each criterion prints one pass/fail line; the process
// exit code is the number of failed criteria. Pass --cli <path> to enable
// the CLI determinism criterion.

#include <algorithm>
#include <unistd.h>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "npcvar/backtesting.hpp"
#include "npcvar/conditional_law.hpp"
#include "npcvar/forecast.hpp"
#include "npcvar/simulation.hpp"
#include "oracles.hpp"

using namespace npcvar;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Independence oracle: conditional quantiles of an independence fit stay
//    within two order statistics of the unconditional sample quantile.
// ---------------------------------------------------------------------------
void criterion_1() {
  const auto t0 = Clock::now();
  const int T = 2000;
  const auto xs = oracles::normal_draws(T, 1);
  ReturnSeries series(xs);
  CopulaDensityFit fit = fit_lltkde2(pseudo_observations(series), {});
  const ConditionalLaw law(series, std::move(fit), CdfMode::step);

  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t r = (std::size_t)std::ceil(0.95 * T);  // 1-indexed
  const double lo = sorted[r - 3];  // two order statistics below X_(r)
  const double hi = sorted[r + 1];  // two above

  bool pass = true;
  std::string detail;
  for (double p : {0.1, 0.5, 0.9}) {
    const double x = sorted[(std::size_t)(p * T)];
    const double cv = law.cvar(x, 0.95);
    detail += fmt(cv) + " ";
    if (cv < lo || cv > hi) pass = false;
  }
  const double secs = elapsed(t0);
  if (secs > 60.0) pass = false;
  report(1, pass, "independence oracle within 2 order statistics",
         "cvar = " + detail + "band [" + fmt(lo) + ", " + fmt(hi) + "], " +
             fmt(secs) + " s");
}

// ---------------------------------------------------------------------------
// 2. Copula-density accuracy on Gaussian-copula data, T = 5000.
// ---------------------------------------------------------------------------
void criterion_2() {
  const double rho = 0.5;
  std::vector<double> maes;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> nd;
    const int n = 5001;
    std::vector<double> xs(n);
    xs[0] = nd(eng) / std::sqrt(1.0 - rho * rho);
    for (int i = 1; i < n; ++i) {
      xs[i] = rho * xs[i - 1] + nd(eng);
    }
    const CopulaDensityFit fit =
        fit_lltkde2(pseudo_observations(ReturnSeries(xs)), {});
    double mae = 0.0;
    int cnt = 0;
    for (double u = 0.1; u < 0.95; u += 0.1) {
      for (double v = 0.1; v < 0.95; v += 0.1) {
        mae += std::fabs(fit.evaluate(u, v) -
                         oracles::gaussian_copula_density(u, v, rho));
        ++cnt;
      }
    }
    maes.push_back(mae / cnt);
  }
  std::sort(maes.begin(), maes.end());
  const double median = maes[2];
  report(2, median <= 0.10, "Gaussian-copula density MAE <= 0.10 (median of 5)",
         "median MAE = " + fmt(median));
}

// ---------------------------------------------------------------------------
// 3. Analytic true cVaR vs brute-force one-step transition quantiles.
// ---------------------------------------------------------------------------
void criterion_3() {
  const SimModelParams params;
  std::mt19937_64 eng(12345);
  std::uniform_real_distribution<double> ux(0.3, 1.8);
  std::uniform_real_distribution<double> ua(0.9, 0.99);
  const InnovationKind kinds[3] = {InnovationKind::standard_normal,
                                   InnovationKind::standard_exponential,
                                   InnovationKind::student_t3};
  bool pass = true;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 9; ++trial) {
    const double x = ux(eng);
    const double alpha = ua(eng);
    const InnovationKind kind = kinds[trial % 3];

    const double z = (x - params.c) / params.d;
    const double bump = std::sqrt(2.0) / x *
                        (0.3989422804014327 / params.d) * std::exp(-0.5 * z * z);
    const double loc = params.a + params.b * x + bump;
    const double scale = std::sqrt(params.omega + params.arch_alpha * x * x);

    const int n = 1000000;
    Rng rng = Rng::substream(777, (std::uint64_t)trial);
    std::vector<double> draws(n);
    for (auto& d : draws) d = loc + scale * sample_innovation(kind, rng);
    std::sort(draws.begin(), draws.end());
    const double empirical = oracles::sorted_quantile(draws, alpha);
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
    const double se = std::sqrt(alpha * (1.0 - alpha) / n) / (dens / scale);
    const double ratio = std::fabs(empirical - truth) / (3.0 * se);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1.0) pass = false;
  }
  report(3, pass, "true cVaR within 3 MC standard errors on 9 triples",
         "worst |error|/3SE = " + fmt(worst_ratio));
}

// ---------------------------------------------------------------------------
// 4 and 5. Desk-scale simulation benchmark and coverage.
// ---------------------------------------------------------------------------
void criteria_4_and_5() {
  const SimModelParams params;
  const std::vector<double> levels{0.95, 0.99};
  const std::uint64_t seed = 2;

  const auto t0 = Clock::now();
  const NpCopForecaster npcop;
  const auto rn = mse_experiment(params, InnovationKind::standard_normal,
                                 levels, 1736, 252, npcop, seed);
  const DknwForecaster dknw;
  const auto rd = mse_experiment(params, InnovationKind::standard_normal,
                                 levels, 1736, 252, dknw, seed);
  const double secs = elapsed(t0);

  const double np95 = rn.per_level[0].mse;
  const double dk95 = rd.per_level[0].mse;
  const bool pass4 = np95 <= 0.2 && np95 <= dk95 && secs <= 1800.0 &&
                     rn.per_level[0].n_forecasts == 1484;
  report(4, pass4, "NP-Cop MSE <= 0.2 and <= DKNW MSE (scenario a, 0.95)",
         "npcop = " + fmt(np95) + ", dknw = " + fmt(dk95) + ", " + fmt(secs) +
             " s");

  double prop95 = 0.0, prop99 = 0.0;
  long n95 = 0, n99 = 0;
  for (const auto& r : rn.trace) {
    if (r.error) continue;
    if (r.level == 0.95) {
      prop95 += r.hit;
      ++n95;
    } else {
      prop99 += r.hit;
      ++n99;
    }
  }
  prop95 /= (double)n95;
  prop99 /= (double)n99;
  const bool pass5 = prop95 >= 0.03 && prop95 <= 0.07 && prop99 >= 0.003 &&
                     prop99 <= 0.025 && n95 == 1484;
  report(5, pass5, "violation proportions in band over 1484 forecasts",
         "at 0.95: " + fmt(prop95) + ", at 0.99: " + fmt(prop99));
}

// ---------------------------------------------------------------------------
// 6. Backtest size on i.i.d. Bernoulli hit sequences.
// ---------------------------------------------------------------------------
void criterion_6() {
  const int reps = 500, n = 1484;
  const double alpha = 0.95;
  std::mt19937_64 eng(7);
  std::bernoulli_distribution bern(1.0 - alpha);
  const std::vector<double> fc(n, 1.0);

  int r_uc = 0, r_cc = 0, r_dq = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::uint8_t> hits(n);
    for (auto& h : hits) h = bern(eng);
    r_uc += kupiec_uc(hits, alpha).p_value < 0.05;
    r_cc += christoffersen_cc(hits, alpha).p_value < 0.05;
    r_dq += engle_manganelli_dq(hits, fc, alpha, 4).p_value < 0.05;
  }
  const double uc = (double)r_uc / reps;
  const double cc = (double)r_cc / reps;
  const double dq = (double)r_dq / reps;
  const bool pass = uc >= 0.02 && uc <= 0.10 && cc >= 0.02 && cc <= 0.10 &&
                    dq >= 0.02 && dq <= 0.10;
  report(6, pass, "UC/CC/DQ size in [0.02, 0.10] at nominal 5%",
         "uc = " + fmt(uc) + ", cc = " + fmt(cc) + ", dq = " + fmt(dq));
}

// ---------------------------------------------------------------------------
// 7. Backtest power on Markov-clustered hit sequences.
// ---------------------------------------------------------------------------
void criterion_7() {
  const int reps = 200, n = 1484;
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u01;
  const std::vector<double> fc(n, 1.0);

  int r_cc = 0, r_dq = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::uint8_t> hits(n);
    hits[0] = u01(eng) < 0.03 / 0.63;  // stationary start
    for (int t = 1; t < n; ++t) {
      const double p = hits[t - 1] ? 0.4 : 0.03;
      hits[t] = u01(eng) < p;
    }
    r_cc += christoffersen_cc(hits, 0.95).p_value < 0.05;
    r_dq += engle_manganelli_dq(hits, fc, 0.95, 4).p_value < 0.05;
  }
  const double cc = (double)r_cc / reps;
  const double dq = (double)r_dq / reps;
  report(7, cc >= 0.8 && dq >= 0.8, "CC/DQ power >= 0.8 on clustered hits",
         "cc = " + fmt(cc) + ", dq = " + fmt(dq));
}

// ---------------------------------------------------------------------------
// 8. Structural invariants.
// ---------------------------------------------------------------------------
void criterion_8() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string why;

  const auto xs = oracles::ar1_draws(500, 0.4, 33);
  ReturnSeries series(xs);
  CopulaDensityFit fit = fit_lltkde2(pseudo_observations(series), {});
  const ConditionalLaw law(series, fit, CdfMode::smoothed);
  const ConditionalLaw step_law(series, std::move(fit), CdfMode::step);

  std::mt19937_64 eng(4);
  std::uniform_real_distribution<double> ux(-1.5, 2.0);

  // conditional CDF monotone in y, bounded
  for (int i = 0; i < 100 && pass; ++i) {
    const double x = ux(eng);
    const auto w = law.weights(x);
    double prev = -1.0;
    for (double y = -4.0; y <= 5.0; y += 0.09) {
      const double f = law.cdf_with_weights(y, w);
      if (f < prev - 1e-15 || f < 0.0 || f > 1.0) {
        pass = false;
        why = "cdf monotonicity";
        break;
      }
      prev = f;
    }
  }

  // cvar monotone in alpha; inversion residual; ces >= cvar
  for (int i = 0; i < 25 && pass; ++i) {
    const double x = ux(eng);
    const auto w = law.weights(x);
    double prev = -1e300;
    for (double a : {0.5, 0.75, 0.9, 0.95, 0.975, 0.99}) {
      const double cv = law.cvar_with_weights(a, w);
      if (cv < prev) {
        pass = false;
        why = "cvar monotonicity";
        break;
      }
      if (std::fabs(law.cdf_with_weights(cv, w) - a) > 1e-6) {
        pass = false;
        why = "inversion residual";
        break;
      }
      prev = cv;
    }
    const EsEstimate es = step_law.ces(x, 0.95);
    if (es.value < step_law.cvar(x, 0.95)) {
      pass = false;
      why = "ces dominance";
    }
  }

  // quantile loss
  std::normal_distribution<double> nd;
  for (int i = 0; i < 500 && pass; ++i) {
    const double a = 0.5 + 0.499 * (i / 500.0);
    const double x = nd(eng), v = nd(eng);
    const double l = quantile_loss(x, v, a);
    if (l < 0.0 || (x != v && l == 0.0) || quantile_loss(x, x, a) != 0.0) {
      pass = false;
      why = "quantile loss";
    }
  }

  // no look-ahead through the full engine
  if (pass) {
    const ReturnSeries sim =
        simulate(SimModelParams{}, InnovationKind::standard_normal, 330, 3);
    const NpCopForecaster fc;
    WindowPolicy policy;
    const auto base = run_forecasts(sim, policy, fc, {0.95});
    std::vector<double> perturbed(sim.values());
    perturbed[300] += 3.0;
    const auto after =
        run_forecasts(ReturnSeries(perturbed), policy, fc, {0.95});
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (base[i].index <= 300 && after[i].forecast != base[i].forecast) {
        pass = false;
        why = "look-ahead";
        break;
      }
    }
  }

  const double secs = elapsed(t0);
  if (secs > 300.0) {
    pass = false;
    why = "runtime";
  }
  report(8, pass, "structural invariant suite",
         pass ? fmt(secs) + " s" : why);
}

// ---------------------------------------------------------------------------
// 9. CLI determinism: every command rerun with identical flags and seed
//    produces byte-identical outputs.
// ---------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void criterion_9(const std::string& cli) {
  if (cli.empty()) {
    report(9, false, "CLI determinism", "no --cli path given");
    return;
  }
  const fs::path dir =
      fs::temp_directory_path() / ("npcvar-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);

  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  auto out = [&](const std::string& name) { return (dir / name).string(); };

  bool pass = true;
  std::string why;
  auto twice = [&](const std::string& what, const std::string& args1,
                   const std::string& args2, const std::string& f1,
                   const std::string& f2) {
    if (!pass) return;
    if (run(args1) != 0 || run(args2) != 0) {
      pass = false;
      why = what + " exit code";
      return;
    }
    if (slurp(f1) != slurp(f2) || slurp(f1).empty()) {
      pass = false;
      why = what + " not byte-identical";
    }
  };

  twice("simulate",
        "simulate --scenario t3 --T 400 --seed 7 --out " + out("s1.csv"),
        "simulate --scenario t3 --T 400 --seed 7 --out " + out("s2.csv"),
        out("s1.csv"), out("s2.csv"));

  twice("fit-copula",
        "fit-copula --in " + out("s1.csv") + " --window-end 150 --grid-size 9 --out " + out("f1.json"),
        "fit-copula --in " + out("s1.csv") + " --window-end 150 --grid-size 9 --out " + out("f2.json"),
        out("f1.json"), out("f2.json"));

  const std::string fc_common =
      "forecast --in " + out("s1.csv") +
      " --input-kind returns --forecaster npcop --policy rolling --width 252 "
      "--levels 0.95,0.99 --out ";
  twice("forecast", fc_common + out("fc1.csv"), fc_common + out("fc2.csv"),
        out("fc1.csv"), out("fc2.csv"));

  twice("backtest",
        "backtest --in " + out("fc1.csv") + " --out " + out("bt1.json") +
            " --csv " + out("btc1.csv"),
        "backtest --in " + out("fc1.csv") + " --out " + out("bt2.json") +
            " --csv " + out("btc2.csv"),
        out("bt1.json"), out("bt2.json"));

  const std::string mse_common =
      "mse-experiment --scenario normal --levels 0.95 --replications 1 --T 400 "
      "--width 252 --seed 3 --out ";
  twice("mse-experiment", mse_common + out("m1.csv"), mse_common + out("m2.csv"),
        out("m1.csv"), out("m2.csv"));

  const std::string cr_common =
      "conditional-report --in " + out("s1.csv") +
      " --x -0.02,0,0.02 --levels 0.95,0.99 --density-points 41 --out ";
  twice("conditional-report",
        cr_common + out("c1.csv") + " --density-out " + out("d1.csv"),
        cr_common + out("c2.csv") + " --density-out " + out("d2.csv"),
        out("c1.csv"), out("c2.csv"));
  if (pass && slurp(out("d1.csv")) != slurp(out("d2.csv"))) {
    pass = false;
    why = "density grid not byte-identical";
  }

  // degenerate input: empty forecast trace must exit nonzero
  if (pass) {
    std::ofstream empty(out("empty.csv"));
    empty << "index,date,level,forecast,realized,hit,error_flag\n";
    empty.close();
    if (run("backtest --in " + out("empty.csv") + " --out " + out("x.json")) == 0) {
      pass = false;
      why = "backtest accepted an empty trace";
    }
  }

  fs::remove_all(dir);
  report(9, pass, "CLI determinism (byte-identical reruns)",
         pass ? "all commands" : why);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }

  criterion_1();
  criterion_2();
  criterion_3();
  criteria_4_and_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9(cli);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d criterion(s) failed\n", g_failures);
  }
  return g_failures;
}
