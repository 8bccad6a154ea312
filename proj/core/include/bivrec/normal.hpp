#pragma once

#include <cmath>

#include "bivrec/errors.hpp"

namespace bivrec {

inline double norm_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

// Standard normal CDF through erfc; accurate in both tails.
inline double norm_cdf(double z) {
  return 0.5 * std::erfc(-z * M_SQRT1_2);
}

// Standard normal quantile. Rational approximation (Acklam) followed by one
// Halley refinement against the erfc-based CDF, giving ~1e-15 accuracy over
// (1e-300, 1 - 1e-16). Fully deterministic across platforms.
double norm_quantile(double p);

// Acklam approximation without the refinement step (~1.2e-9 relative error);
// the random-sampling path uses this, where the approximation error sits far
// below Monte Carlo noise.
double norm_quantile_unrefined(double p);

}  // namespace bivrec
