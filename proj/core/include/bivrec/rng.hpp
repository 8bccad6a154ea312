#pragma once

#include <cstdint>
#include <random>

#include "bivrec/normal.hpp"

namespace bivrec {

// Deterministic random stream. All downstream distributions are derived from
// mt19937_64 raw output through fixed arithmetic (inverse-CDF normal,
// Robert-style truncated normal, Marsaglia-Tsang gamma), so a seed fixes the
// entire computation byte-for-byte on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t raw() { return gen_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() { return norm_quantile_unrefined(uniform()); }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Gamma(shape, rate) via Marsaglia-Tsang; shape boosting below 1.
  double gamma(double shape, double rate);

  // Inverse gamma with shape a and scale b: 1/X ~ Gamma(a, rate=b).
  double inverse_gamma(double shape, double scale) {
    return 1.0 / gamma(shape, scale);
  }

  // N(mu, 1) truncated to (0, inf). Robert (1995) tail rejection when the
  // truncation point sits deep in the upper tail, inverse CDF otherwise.
  double trunc_normal_positive(double mu);

  // N(mu, sd^2) truncated to (0, inf).
  double trunc_normal_positive(double mu, double sd) {
    return sd * trunc_normal_positive(mu / sd);
  }

  // N(mu, 1) truncated to the half line matching a binary indicator:
  // (0, inf) when positive, (-inf, 0] otherwise.
  double trunc_normal_signed(double mu, bool positive) {
    return positive ? trunc_normal_positive(mu) : -trunc_normal_positive(-mu);
  }

  // Independent stream for child work unit `id`; splitmix64 seed mixing.
  Rng child(std::uint64_t id) const { return Rng(mix(seed_, id)); }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t id);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace bivrec
