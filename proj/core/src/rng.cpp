#include "bivrec/rng.hpp"

#include <cmath>

namespace bivrec {

double Rng::gamma(double shape, double rate) {
  if (shape < 1.0) {
    double g = gamma(shape + 1.0, rate);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::trunc_normal_positive(double mu) {
  const double a = -mu;  // lower truncation point of the standardized variable
  double z;
  if (a > 0.67448975) {
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      z = a + exponential(alpha);
      const double g = std::exp(-0.5 * (z - alpha) * (z - alpha));
      if (uniform() <= g) break;
    }
  } else {
    // Inverse CDF on the tail mass above a.
    z = -norm_quantile_unrefined(norm_cdf(-a) * uniform());
  }
  return z + mu;
}

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t id) {
  // splitmix64 finalizer over seed xor a spread copy of id.
  std::uint64_t x = seed ^ (id * 0x9E3779B97F4A7C15ull);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

}  // namespace bivrec
