#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>

namespace npcvar::loclik {

enum class FitPath : std::uint8_t { quadratic, linear, floor };

struct NewtonSettings {
  int max_iter = 50;
  double grad_tol = 1e-8;
};

// Fallback counters aggregated across the evaluations of one fitted object.
// Atomic so concurrent evaluations need no external synchronisation; copies
// snapshot the current counts.
struct FitDiagnostics {
  std::atomic<long> quadratic{0};
  std::atomic<long> linear{0};
  std::atomic<long> floored{0};

  FitDiagnostics() = default;
  FitDiagnostics(const FitDiagnostics& other)
      : quadratic(other.quadratic.load()),
        linear(other.linear.load()),
        floored(other.floored.load()) {}
  FitDiagnostics& operator=(const FitDiagnostics& other) {
    quadratic.store(other.quadratic.load());
    linear.store(other.linear.load());
    floored.store(other.floored.load());
    return *this;
  }

  void record(FitPath p) noexcept {
    switch (p) {
      case FitPath::quadratic: quadratic.fetch_add(1, std::memory_order_relaxed); break;
      case FitPath::linear: linear.fetch_add(1, std::memory_order_relaxed); break;
      case FitPath::floor: floored.fetch_add(1, std::memory_order_relaxed); break;
    }
  }
};

struct DiagnosticsSnapshot {
  long quadratic = 0;
  long linear = 0;
  long floored = 0;
  long fallbacks() const { return linear + floored; }
};

struct PointFit {
  double density = 0.0;  // fitted density value at the query point
  FitPath path = FitPath::floor;
  int iterations = 0;
};

// Final fallback value: the plain kernel density estimate floored at this.
inline constexpr double kDensityFloor = 1e-12;

// Local log-polynomial density fit at a single query point. The local
// log-likelihood  sum_i K_h(x_i - q) P(x_i - q) - n * int K_h(t - q) e^P(t - q) dt
// is maximised over quadratic log-polynomials by safeguarded Newton; the
// density estimate is exp(P(0)). Degradation ladder: quadratic -> linear ->
// kernel-density floor, counted in `diag` when given. `exclude` skips one
// sample index (leave-one-out); pass a negative value to use all points.
PointFit fit_local_logpoly_1d(std::span<const double> xs, double query,
                              double bandwidth,
                              const NewtonSettings& settings = {},
                              std::ptrdiff_t exclude = -1,
                              FitDiagnostics* diag = nullptr);

// Bivariate version with diagonal bandwidth matrix diag(hx^2, hy^2). The
// Gaussian integral is closed-form whenever (H^-1 - 2A) is positive definite
// (A = quadratic coefficient matrix); otherwise it is evaluated by 32x32
// Gauss-Hermite quadrature.
PointFit fit_local_logpoly_2d(std::span<const double> xs,
                              std::span<const double> ys, double qx, double qy,
                              double hx, double hy,
                              const NewtonSettings& settings = {},
                              std::ptrdiff_t exclude = -1,
                              FitDiagnostics* diag = nullptr);

}  // namespace npcvar::loclik
