#pragma once

namespace npcvar {

// Standard normal density.
double norm_pdf(double x);

// Standard normal distribution function, computed from erfc.
double norm_cdf(double x);

// Probit function, the inverse of norm_cdf. Rational approximation refined
// by one Newton step against the erfc-based CDF; absolute error well below
// 1e-9 on (0,1). Throws std::domain_error for u outside (0,1).
double probit(double u);

}  // namespace npcvar
