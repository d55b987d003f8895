#include "npcvar/local_likelihood.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "npcvar/gauss_hermite.hpp"

namespace npcvar::loclik {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kExpCap = 690.0;  // exp() overflow guard
constexpr int kGhOrder = 32;
constexpr int kMaxBasis = 6;
constexpr int kLineSearchMax = 30;

// Cholesky solve of A x = b for a small SPD system; false when not SPD.
bool solve_spd(int n, const double* A, const double* b, double* x) {
  double L[kMaxBasis * kMaxBasis];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[i * n + j];
      for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        L[i * n + i] = std::sqrt(s);
      } else {
        L[i * n + j] = s / L[j * n + j];
      }
    }
  }
  double y[kMaxBasis];
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
    y[i] = s / L[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * x[k];
    x[i] = s / L[i * n + i];
  }
  return true;
}

// Integral term and its basis moments for one model family. Implementations
// fill I = int K_H e^P, EI[j] = int K_H e^P psi_j and EII = the matching
// second-moment matrix; `ok` is false when the evaluation is numerically
// unusable (divergent or overflowing).
struct IntegralEval {
  double I = 0.0;
  double EI[kMaxBasis] = {};
  double EII[kMaxBasis * kMaxBasis] = {};
  bool ok = false;
};

// ---------------------------------------------------------------------------
// 1-d model: basis (1, z, z^2); the linear variant uses the first nb = 2.
// ---------------------------------------------------------------------------

struct Model1 {
  double h;
  int nb;  // 3 quadratic, 2 linear

  bool closed_form_valid(const double* th) const {
    const double m = 1.0 / (h * h) - 2.0 * (nb > 2 ? th[2] : 0.0);
    return m > 0.0;
  }

  bool integral(const double* th, double* out) const {
    const double a2 = nb > 2 ? th[2] : 0.0;
    const double m = 1.0 / (h * h) - 2.0 * a2;
    if (m > 0.0) {
      const double mu = th[1] / m;
      const double ex = th[0] + 0.5 * th[1] * mu - std::log(h) - 0.5 * std::log(m);
      if (ex > kExpCap) return false;
      *out = std::exp(ex);
      return true;
    }
    return gh_integral_only(th, out);
  }

  bool moments(const double* th, IntegralEval* ev) const {
    const double a2 = nb > 2 ? th[2] : 0.0;
    const double m = 1.0 / (h * h) - 2.0 * a2;
    if (!(m > 0.0)) return gh_moments(th, ev);

    const double mu = th[1] / m;
    const double s2 = 1.0 / m;
    const double ex = th[0] + 0.5 * th[1] * mu - std::log(h) - 0.5 * std::log(m);
    if (ex > kExpCap) return false;
    const double I = std::exp(ex);

    double mom[5];
    mom[0] = 1.0;
    for (int p = 1; p <= 4; ++p) {
      mom[p] = mu * mom[p - 1] + s2 * (p - 1) * (p >= 2 ? mom[p - 2] : 0.0);
    }
    ev->I = I;
    for (int j = 0; j < nb; ++j) ev->EI[j] = I * mom[j];
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k) ev->EII[j * nb + k] = I * mom[j + k];
    ev->ok = std::isfinite(I);
    return ev->ok;
  }

  bool gh_integral_only(const double* th, double* out) const {
    const GaussHermiteRule& gh = gauss_hermite(kGhOrder);
    double I = 0.0;
    for (int a = 0; a < kGhOrder; ++a) {
      const double z = kSqrt2 * h * gh.nodes[a];
      double p = th[0] + th[1] * z;
      if (nb > 2) p += th[2] * z * z;
      if (p > kExpCap) return false;
      I += gh.weights[a] * std::exp(p);
    }
    I /= std::sqrt(M_PI);
    *out = I;
    return std::isfinite(I);
  }

  bool gh_moments(const double* th, IntegralEval* ev) const {
    const GaussHermiteRule& gh = gauss_hermite(kGhOrder);
    std::memset(ev->EI, 0, sizeof(ev->EI));
    std::memset(ev->EII, 0, sizeof(ev->EII));
    double I = 0.0;
    double psi[3];
    for (int a = 0; a < kGhOrder; ++a) {
      const double z = kSqrt2 * h * gh.nodes[a];
      psi[0] = 1.0;
      psi[1] = z;
      psi[2] = z * z;
      double p = th[0] + th[1] * z;
      if (nb > 2) p += th[2] * psi[2];
      if (p > kExpCap) return false;
      const double e = gh.weights[a] * std::exp(p);
      I += e;
      for (int j = 0; j < nb; ++j) ev->EI[j] += e * psi[j];
      for (int j = 0; j < nb; ++j)
        for (int k = j; k < nb; ++k) ev->EII[j * nb + k] += e * psi[j] * psi[k];
    }
    const double norm = 1.0 / std::sqrt(M_PI);
    ev->I = I * norm;
    for (int j = 0; j < nb; ++j) ev->EI[j] *= norm;
    for (int j = 0; j < nb; ++j)
      for (int k = j; k < nb; ++k) {
        ev->EII[j * nb + k] *= norm;
        ev->EII[k * nb + j] = ev->EII[j * nb + k];
      }
    ev->ok = std::isfinite(ev->I);
    return ev->ok;
  }
};

// ---------------------------------------------------------------------------
// 2-d model: basis (1, zx, zy, zx^2, zx*zy, zy^2); linear variant nb = 3.
// ---------------------------------------------------------------------------

constexpr int kPx[6] = {0, 1, 0, 2, 1, 0};
constexpr int kPy[6] = {0, 0, 1, 0, 1, 2};

struct Model2 {
  double hx, hy;
  int nb;  // 6 quadratic, 3 linear

  // M = H^-1 - 2A with A the quadratic coefficient matrix.
  void m_matrix(const double* th, double* m00, double* m01, double* m11) const {
    const double a20 = nb > 3 ? th[3] : 0.0;
    const double a11 = nb > 3 ? th[4] : 0.0;
    const double a02 = nb > 3 ? th[5] : 0.0;
    *m00 = 1.0 / (hx * hx) - 2.0 * a20;
    *m01 = -a11;
    *m11 = 1.0 / (hy * hy) - 2.0 * a02;
  }

  bool integral(const double* th, double* out) const {
    double m00, m01, m11;
    m_matrix(th, &m00, &m01, &m11);
    const double det = m00 * m11 - m01 * m01;
    if (m00 > 0.0 && det > 0.0) {
      const double sxx = m11 / det, syy = m00 / det, sxy = -m01 / det;
      const double mux = sxx * th[1] + sxy * th[2];
      const double muy = sxy * th[1] + syy * th[2];
      const double ex = th[0] + 0.5 * (th[1] * mux + th[2] * muy) -
                        std::log(hx * hy) - 0.5 * std::log(det);
      if (ex > kExpCap) return false;
      *out = std::exp(ex);
      return true;
    }
    return gh_integral_only(th, out);
  }

  bool moments(const double* th, IntegralEval* ev) const {
    double m00, m01, m11;
    m_matrix(th, &m00, &m01, &m11);
    const double det = m00 * m11 - m01 * m01;
    if (!(m00 > 0.0 && det > 0.0)) return gh_moments(th, ev);

    const double sxx = m11 / det, syy = m00 / det, sxy = -m01 / det;
    const double mux = sxx * th[1] + sxy * th[2];
    const double muy = sxy * th[1] + syy * th[2];
    const double ex = th[0] + 0.5 * (th[1] * mux + th[2] * muy) -
                      std::log(hx * hy) - 0.5 * std::log(det);
    if (ex > kExpCap) return false;
    const double I = std::exp(ex);

    // Gaussian moment table E[zx^p zy^q] under N(mu, Sigma), p + q <= 4,
    // filled by the Stein recurrence.
    double mom[5][5] = {};
    mom[0][0] = 1.0;
    for (int d = 1; d <= 4; ++d) {
      for (int p = 0; p <= d; ++p) {
        const int q = d - p;
        if (p > 0) {
          double v = mux * mom[p - 1][q];
          if (p >= 2) v += sxx * (p - 1) * mom[p - 2][q];
          if (q >= 1) v += sxy * q * mom[p - 1][q - 1];
          mom[p][q] = v;
        } else {
          double v = muy * mom[0][q - 1];
          if (q >= 2) v += syy * (q - 1) * mom[0][q - 2];
          mom[0][q] = v;
        }
      }
    }
    ev->I = I;
    for (int j = 0; j < nb; ++j) ev->EI[j] = I * mom[kPx[j]][kPy[j]];
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k)
        ev->EII[j * nb + k] = I * mom[kPx[j] + kPx[k]][kPy[j] + kPy[k]];
    ev->ok = std::isfinite(I);
    return ev->ok;
  }

  double poly(const double* th, double zx, double zy) const {
    double p = th[0] + th[1] * zx + th[2] * zy;
    if (nb > 3) p += th[3] * zx * zx + th[4] * zx * zy + th[5] * zy * zy;
    return p;
  }

  bool gh_integral_only(const double* th, double* out) const {
    const GaussHermiteRule& gh = gauss_hermite(kGhOrder);
    double I = 0.0;
    for (int a = 0; a < kGhOrder; ++a) {
      const double zx = kSqrt2 * hx * gh.nodes[a];
      for (int b = 0; b < kGhOrder; ++b) {
        const double zy = kSqrt2 * hy * gh.nodes[b];
        const double p = poly(th, zx, zy);
        if (p > kExpCap) return false;
        I += gh.weights[a] * gh.weights[b] * std::exp(p);
      }
    }
    I /= M_PI;
    *out = I;
    return std::isfinite(I);
  }

  bool gh_moments(const double* th, IntegralEval* ev) const {
    const GaussHermiteRule& gh = gauss_hermite(kGhOrder);
    std::memset(ev->EI, 0, sizeof(ev->EI));
    std::memset(ev->EII, 0, sizeof(ev->EII));
    double I = 0.0;
    double psi[6];
    for (int a = 0; a < kGhOrder; ++a) {
      const double zx = kSqrt2 * hx * gh.nodes[a];
      for (int b = 0; b < kGhOrder; ++b) {
        const double zy = kSqrt2 * hy * gh.nodes[b];
        const double p = poly(th, zx, zy);
        if (p > kExpCap) return false;
        const double e = gh.weights[a] * gh.weights[b] * std::exp(p);
        psi[0] = 1.0;
        psi[1] = zx;
        psi[2] = zy;
        psi[3] = zx * zx;
        psi[4] = zx * zy;
        psi[5] = zy * zy;
        I += e;
        for (int j = 0; j < nb; ++j) ev->EI[j] += e * psi[j];
        for (int j = 0; j < nb; ++j)
          for (int k = j; k < nb; ++k) ev->EII[j * nb + k] += e * psi[j] * psi[k];
      }
    }
    const double norm = 1.0 / M_PI;
    ev->I = I * norm;
    for (int j = 0; j < nb; ++j) ev->EI[j] *= norm;
    for (int j = 0; j < nb; ++j)
      for (int k = j; k < nb; ++k) {
        ev->EII[j * nb + k] *= norm;
        ev->EII[k * nb + j] = ev->EII[j * nb + k];
      }
    ev->ok = std::isfinite(ev->I);
    return ev->ok;
  }
};

// Safeguarded Newton ascent of L(theta) = theta . S - n * I(theta). Returns
// true with theta at a stationary point, false when the solve broke down.
template <class Model>
bool newton_ascend(const Model& model, const double* S, double n_eff, double W,
                   const NewtonSettings& settings, double* theta, int* iters) {
  const int nb = model.nb;
  const double tol = settings.grad_tol * std::max(1.0, W);

  IntegralEval ev;
  if (!model.moments(theta, &ev)) return false;
  double L_cur = -n_eff * ev.I;
  for (int j = 0; j < nb; ++j) L_cur += theta[j] * S[j];

  for (int iter = 0; iter < settings.max_iter; ++iter) {
    *iters = iter + 1;
    double g[kMaxBasis];
    double gmax = 0.0;
    for (int j = 0; j < nb; ++j) {
      g[j] = S[j] - n_eff * ev.EI[j];
      gmax = std::max(gmax, std::fabs(g[j]));
    }
    if (gmax <= tol) return true;

    double negH[kMaxBasis * kMaxBasis];
    for (int j = 0; j < nb * nb; ++j) negH[j] = n_eff * ev.EII[j];
    double delta[kMaxBasis];
    if (!solve_spd(nb, negH, g, delta)) return false;

    double step = 1.0;
    bool accepted = false;
    double cand[kMaxBasis] = {};
    for (int ls = 0; ls < kLineSearchMax; ++ls) {
      bool sane = true;
      for (int j = 0; j < nb; ++j) {
        cand[j] = theta[j] + step * delta[j];
        if (!std::isfinite(cand[j]) || std::fabs(cand[j]) > 1e6) sane = false;
      }
      double I_c = 0.0;
      if (sane && model.integral(cand, &I_c) && std::isfinite(I_c)) {
        double L_c = -n_eff * I_c;
        for (int j = 0; j < nb; ++j) L_c += cand[j] * S[j];
        if (L_c >= L_cur) {
          L_cur = L_c;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No uphill step left; accept only if the gradient is already tiny.
      return gmax <= 10.0 * tol;
    }
    for (int j = 0; j < nb; ++j) theta[j] = cand[j];
    if (!model.moments(theta, &ev)) return false;
  }
  return false;
}

}  // namespace

PointFit fit_local_logpoly_1d(std::span<const double> xs, double query,
                              double bandwidth, const NewtonSettings& settings,
                              std::ptrdiff_t exclude, FitDiagnostics* diag) {
  const double h = bandwidth;
  double S[3] = {0.0, 0.0, 0.0};
  double n_eff = 0.0;
  const double norm = 1.0 / (h * std::sqrt(kTwoPi));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if ((std::ptrdiff_t)i == exclude) continue;
    n_eff += 1.0;
    const double z = xs[i] - query;
    const double u = z / h;
    const double w = norm * std::exp(-0.5 * u * u);
    S[0] += w;
    S[1] += w * z;
    S[2] += w * z * z;
  }
  const double W = S[0];
  const double kde = n_eff > 0.0 ? W / n_eff : 0.0;

  PointFit out;
  if (W > 0.0 && n_eff > 0.0) {
    double theta[3] = {std::log(std::max(kde, 1e-300)), 0.0, 0.0};
    Model1 quad{h, 3};
    if (newton_ascend(quad, S, n_eff, W, settings, theta, &out.iterations)) {
      out.density = std::exp(theta[0]);
      out.path = FitPath::quadratic;
      if (std::isfinite(out.density) && out.density > 0.0) {
        if (diag) diag->record(out.path);
        return out;
      }
    }
    double th_lin[3] = {std::log(std::max(kde, 1e-300)), 0.0, 0.0};
    Model1 lin{h, 2};
    if (newton_ascend(lin, S, n_eff, W, settings, th_lin, &out.iterations)) {
      out.density = std::exp(th_lin[0]);
      out.path = FitPath::linear;
      if (std::isfinite(out.density) && out.density > 0.0) {
        if (diag) diag->record(out.path);
        return out;
      }
    }
  }
  out.density = std::max(kde, kDensityFloor);
  out.path = FitPath::floor;
  if (diag) diag->record(out.path);
  return out;
}

PointFit fit_local_logpoly_2d(std::span<const double> xs,
                              std::span<const double> ys, double qx, double qy,
                              double hx, double hy,
                              const NewtonSettings& settings,
                              std::ptrdiff_t exclude, FitDiagnostics* diag) {
  double S[6] = {};
  double n_eff = 0.0;
  const double norm = 1.0 / (kTwoPi * hx * hy);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if ((std::ptrdiff_t)i == exclude) continue;
    n_eff += 1.0;
    const double zx = xs[i] - qx;
    const double zy = ys[i] - qy;
    const double ux = zx / hx;
    const double uy = zy / hy;
    const double w = norm * std::exp(-0.5 * (ux * ux + uy * uy));
    S[0] += w;
    S[1] += w * zx;
    S[2] += w * zy;
    S[3] += w * zx * zx;
    S[4] += w * zx * zy;
    S[5] += w * zy * zy;
  }
  const double W = S[0];
  const double kde = n_eff > 0.0 ? W / n_eff : 0.0;

  PointFit out;
  if (W > 0.0 && n_eff > 0.0) {
    double theta[6] = {std::log(std::max(kde, 1e-300)), 0, 0, 0, 0, 0};
    Model2 quad{hx, hy, 6};
    if (newton_ascend(quad, S, n_eff, W, settings, theta, &out.iterations)) {
      out.density = std::exp(theta[0]);
      out.path = FitPath::quadratic;
      if (std::isfinite(out.density) && out.density > 0.0) {
        if (diag) diag->record(out.path);
        return out;
      }
    }
    double th_lin[6] = {std::log(std::max(kde, 1e-300)), 0, 0, 0, 0, 0};
    Model2 lin{hx, hy, 3};
    if (newton_ascend(lin, S, n_eff, W, settings, th_lin, &out.iterations)) {
      out.density = std::exp(th_lin[0]);
      out.path = FitPath::linear;
      if (std::isfinite(out.density) && out.density > 0.0) {
        if (diag) diag->record(out.path);
        return out;
      }
    }
  }
  out.density = std::max(kde, kDensityFloor);
  out.path = FitPath::floor;
  if (diag) diag->record(out.path);
  return out;
}

}  // namespace npcvar::loclik
