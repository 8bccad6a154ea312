#include <doctest.h>

#include <cmath>

#include "bivrec/rng.hpp"
#include "bivrec/synthetic.hpp"

using namespace bivrec;

TEST_CASE("model generator round trip is bit exact") {
  SyntheticSpec spec;
  spec.n_sites = 6;
  spec.n_years = 12;
  spec.n_days = 8;
  spec.tie_rate = 0.15;
  spec.missing_rate = 0.05;
  const SyntheticData data = generate_synthetic(spec, 20240601);
  const RecordPanel extracted = extract_indicators(data.stations);
  REQUIRE(extracted.marks[0].size() == data.truth_panel.marks[0].size());
  for (int s = 0; s < 2; ++s) {
    CHECK(extracted.marks[s] == data.truth_panel.marks[s]);
  }
  // ties actually appear at this rate
  long tied = 0;
  for (MarkCode m : extracted.marks[0]) tied += m >= 2;
  CHECK(tied > 0);
}

TEST_CASE("stationary generator round trip and law") {
  SyntheticSpec spec;
  spec.generator = GeneratorKind::Stationary;
  spec.n_sites = 40;
  spec.n_years = 15;
  spec.n_days = 10;
  const SyntheticData data = generate_synthetic(spec, 99);
  const RecordPanel p = extract_indicators(data.stations);
  for (int s = 0; s < 2; ++s) {
    CHECK(p.marks[s] == data.truth_panel.marks[s]);
  }
  // record rate ~ 1/t pooled over the panel
  const long n_series = 40L * 11;  // sites x (days incl. seed)
  for (int t : {2, 5, 10, 15}) {
    long ones = 0;
    for (int i = 0; i < p.n_sites(); ++i) {
      for (int d = 0; d <= p.layout.n_days; ++d) {
        ones += p.mark(Signal::Max, i, t - 1, d) == kMarkOne;
      }
    }
    const double rate = static_cast<double>(ones) / static_cast<double>(n_series);
    const double prob = 1.0 / t;
    const double se = std::sqrt(prob * (1 - prob) / static_cast<double>(n_series));
    CHECK(std::abs(rate - prob) <= 4.0 * se);
  }
}

TEST_CASE("zero coefficients and tiny coregionalisation give rate one half") {
  SyntheticSpec spec;
  spec.n_sites = 30;
  spec.n_years = 10;
  spec.n_days = 12;
  spec.model.coef = CoefMatrix::Zero();
  spec.model.coreg = CoregConstant{1e-8, 1e-8, 0.0};
  const SyntheticData data = generate_synthetic(spec, 7);
  const RecordPanel& p = data.truth_panel;
  long ones = 0, cells = 0;
  for (int i = 0; i < p.n_sites(); ++i) {
    for (int t = 1; t < p.layout.n_years; ++t) {
      for (int d = 1; d <= p.layout.n_days; ++d) {
        ones += p.mark(Signal::Max, i, t, d) == kMarkOne;
        ++cells;
      }
    }
  }
  const double rate = static_cast<double>(ones) / static_cast<double>(cells);
  const double se = std::sqrt(0.25 / static_cast<double>(cells));
  CHECK(std::abs(rate - 0.5) <= 4.0 * se);
}

TEST_CASE("generator rejects bad specs") {
  SyntheticSpec spec;
  spec.n_sites = 1;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
  spec.n_sites = 4;
  spec.n_years = 2;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
  spec.n_years = 5;
  spec.tie_rate = 1.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
  spec.tie_rate = 0.0;
  spec.n_days = 93;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
}

TEST_CASE("generator is deterministic per seed") {
  SyntheticSpec spec;
  spec.n_sites = 4;
  spec.n_years = 6;
  spec.n_days = 5;
  const SyntheticData a = generate_synthetic(spec, 5150);
  const SyntheticData b = generate_synthetic(spec, 5150);
  CHECK(a.truth_panel.marks[0] == b.truth_panel.marks[0]);
  CHECK(a.stations[2].values[1] == b.stations[2].values[1]);
  const SyntheticData c = generate_synthetic(spec, 5151);
  CHECK(a.truth_panel.marks[0] != c.truth_panel.marks[0]);
}

TEST_CASE("spatially varying generator realizes positive diagonal fields") {
  SyntheticSpec spec;
  spec.n_sites = 6;
  spec.n_years = 6;
  spec.n_days = 5;
  spec.model.spatially_varying = true;
  const SyntheticData data = generate_synthetic(spec, 404);
  REQUIRE(data.a11_s.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(data.a11_s[i] > 0.0);
    CHECK(data.a22_s[i] > 0.0);
  }
}
