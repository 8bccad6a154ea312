#include "bivrec/normal.hpp"

namespace bivrec {

namespace {

const double kA[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                      -2.759285104469687e+02, 1.383577518672690e+02,
                      -3.066479806614716e+01, 2.506628277459239e+00};
const double kB[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                      -1.556989798598866e+02, 6.680131188771972e+01,
                      -1.328068155288572e+01};
const double kC[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                      -2.400758277161838e+00, -2.549732539343734e+00,
                      4.374664141464968e+00,  2.938163982698783e+00};
const double kD[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                      2.445134137142996e+00, 3.754408661907416e+00};

double acklam(double p) {
  const double p_low = 0.02425;
  double q, r;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
           (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
         ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
}

}  // namespace

double norm_quantile_unrefined(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericalError("norm_quantile: p must lie in (0,1)");
  }
  return acklam(p);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericalError("norm_quantile: p must lie in (0,1)");
  }
  double x = acklam(p);
  // Halley step. exp(x^2/2) overflows past |x| ~ 38; the rational start is
  // already exact to ~1e-9 relative out there, so skip refinement.
  if (std::abs(x) < 37.0) {
    const double sqrt_2pi = 2.506628274631000502;
    double e = norm_cdf(x) - p;
    double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace bivrec
