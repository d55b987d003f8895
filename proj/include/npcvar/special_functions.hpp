#pragma once

namespace npcvar {

// ln Gamma(x) for x > 0 (Lanczos).
double gammln(double x);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gammp(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gammq(double a, double x);

// Survival function of the chi-square distribution with df degrees of
// freedom: P(X > x) = Q(df/2, x/2).
double chi2_sf(double x, int df);

}  // namespace npcvar
