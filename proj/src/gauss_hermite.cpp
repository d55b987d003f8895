#include "npcvar/gauss_hermite.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace npcvar {

namespace {

GaussHermiteRule compute_rule(int n) {
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const long double pim4 = 0.7511255444649424828587L;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  long double z = 0.0L;

  for (int i = 0; i < m; ++i) {
    // Initial guesses for the roots, largest first.
    if (i == 0) {
      z = std::sqrt((long double)(2 * n + 1)) -
          1.85575L * std::pow((long double)(2 * n + 1), -0.16667L);
    } else if (i == 1) {
      z -= 1.14L * std::pow((long double)n, 0.426L) / z;
    } else if (i == 2) {
      z = 1.86L * z - 0.86L * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91L * z - 0.91L * rule.nodes[1];
    } else {
      z = 2.0L * z - rule.nodes[i - 2];
    }

    long double pp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p1 = pim4;
      long double p2 = 0.0L;
      for (int j = 0; j < n; ++j) {
        const long double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0L / (j + 1)) * p2 -
             std::sqrt((long double)j / (j + 1)) * p3;
      }
      pp = std::sqrt((long double)(2 * n)) * p2;
      const long double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-18L) break;
    }

    rule.nodes[i] = (double)z;
    rule.nodes[n - 1 - i] = -(double)z;
    rule.weights[i] = (double)(2.0L / (pp * pp));
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  if (n < 1) throw std::domain_error("gauss_hermite: order must be >= 1");
  static std::map<int, GaussHermiteRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, compute_rule(n)).first;
  }
  return it->second;
}

}  // namespace npcvar
