#include <doctest.h>

#include <cmath>

#include "bivrec/records.hpp"
#include "bivrec/rng.hpp"
#include "test_util.hpp"

using namespace bivrec;
using namespace bivrec::testing;

namespace {

std::vector<MarkCode> marks_of(const std::vector<double>& seq) {
  auto series = make_series(
      static_cast<int>(seq.size()), 0,
      [&](Signal, int t, int) { return seq[static_cast<std::size_t>(t)]; });
  return extract_signal_marks(series, Signal::Max);
}

}  // namespace

TEST_CASE("strict records") {
  CHECK(marks_of({3.0, 1.0, 4.0, 2.0, 5.0}) ==
        std::vector<MarkCode>{1, 0, 1, 0, 1});
}

TEST_CASE("tied records count preceding weak records") {
  CHECK(marks_of({3.0, 3.0, 3.0}) == std::vector<MarkCode>{1, 2, 3});
  // A new strict record resets the weak-record count.
  CHECK(marks_of({3.0, 3.0, 4.0, 4.0}) == std::vector<MarkCode>{1, 2, 1, 2});
}

TEST_CASE("missing behaves as minus infinity") {
  CHECK(marks_of({3.0, kMissingValue, 4.0}) == std::vector<MarkCode>{1, 0, 1});
  // Missing at t=1 is ONE by definition and leaves the running value unset,
  // so the next present value is a record.
  CHECK(marks_of({kMissingValue, 2.0, 1.0}) == std::vector<MarkCode>{1, 1, 0});
  // Missing never extends a tie chain.
  CHECK(marks_of({3.0, kMissingValue, 3.0}) == std::vector<MarkCode>{1, 0, 2});
}

TEST_CASE("extraction errors") {
  auto one_year = make_series(1, 0, [](Signal, int, int) { return 1.0; });
  CHECK_THROWS_AS(extract_signal_marks(one_year, Signal::Max), DataError);
  CHECK_THROWS_AS(
      extract_indicators(std::span<const DailyTemperatureSeries>{}), DataError);
}

TEST_CASE("counting identity: records equal strict running maxima") {
  Rng rng(991);
  for (int rep = 0; rep < 200; ++rep) {
    const int T = 3 + static_cast<int>(rng.raw() % 20);
    std::vector<double> seq(T);
    for (auto& v : seq) v = rng.normal();
    const auto marks = marks_of(seq);
    long ones = 0;
    for (MarkCode m : marks) ones += m == kMarkOne;
    long maxima = 0;
    double best = -1e300;
    for (double v : seq) {
      if (v > best) {
        ++maxima;
        best = v;
      }
    }
    CHECK(ones == maxima);
  }
}

TEST_CASE("extraction is deterministic") {
  auto series = make_series(6, 3, [](Signal s, int t, int d) {
    return std::sin(3.1 * t + 0.7 * d + static_cast<int>(s));
  });
  CHECK(extract_signal_marks(series, Signal::Min) ==
        extract_signal_marks(series, Signal::Min));
}

TEST_CASE("stationary law at unit-test scale") {
  // i.i.d. continuous series: P(record at t) = 1/t, marks independent in t.
  const int n_series = 4000;
  const int T = 12;
  Rng rng(1234);
  std::vector<std::vector<MarkCode>> all;
  for (int i = 0; i < n_series; ++i) {
    std::vector<double> seq(T);
    for (auto& v : seq) v = rng.normal();
    all.push_back(marks_of(seq));
  }
  for (int t = 2; t <= T; ++t) {
    double rate = 0.0;
    for (const auto& m : all) rate += m[t - 1] == kMarkOne;
    rate /= n_series;
    const double p = 1.0 / t;
    const double se = std::sqrt(p * (1 - p) / n_series);
    CHECK(std::abs(rate - p) <= 3.5 * se);
  }
  for (int t = 2; t < T; ++t) {
    double m1 = 0, m2 = 0, m12 = 0;
    for (const auto& m : all) {
      const double a = m[t - 1] == kMarkOne;
      const double b = m[t] == kMarkOne;
      m1 += a;
      m2 += b;
      m12 += a * b;
    }
    m1 /= n_series;
    m2 /= n_series;
    m12 /= n_series;
    const double cov = m12 - m1 * m2;
    const double se = std::sqrt(m1 * (1 - m1) * m2 * (1 - m2) / n_series);
    CHECK(std::abs(cov) <= 3.5 * se);
  }
}

TEST_CASE("joint panel marks") {
  auto series =
      make_series(2, 0, [](Signal, int t, int) { return t == 0 ? 1.0 : 2.0; });
  RecordPanel p =
      extract_indicators(std::span<const DailyTemperatureSeries>(&series, 1));

  SUBCASE("one and one") {
    JointPanel jp = joint_panel(p);
    CHECK(jp.marks[jp.index(0, 1, 0)].is_one());
  }
  SUBCASE("zero dominates") {
    p.mark(Signal::Min, 0, 1, 0) = kMarkZero;
    JointPanel jp = joint_panel(p);
    CHECK(jp.marks[jp.index(0, 1, 0)].is_zero());
  }
  SUBCASE("tied product resolves at probability 1/r") {
    p.mark(Signal::Max, 0, 1, 0) = 2;  // TIED(2)
    JointPanel jp = joint_panel(p);
    const JointMark jm = jp.marks[jp.index(0, 1, 0)];
    CHECK(jm.is_tied_product());
    CHECK(jm.success_prob() == doctest::Approx(0.5));
  }
  SUBCASE("shape mismatch") {
    RecordPanel broken = p;
    broken.marks[1].pop_back();
    CHECK_THROWS_AS(joint_panel(broken), DataError);
  }
}

TEST_CASE("empirical rate") {
  auto s1 = make_series(3, 4, [](Signal, int t, int d) { return t * 10.0 + d; });
  auto s2 = s1;
  s2.meta.id = "T2";
  std::vector<DailyTemperatureSeries> both{s1, s2};
  RecordPanel p = extract_indicators(both);
  CHECK(empirical_rate(p, Signal::Max, 1) == doctest::Approx(1.0));
  // strictly increasing values: every year is a record
  CHECK(empirical_rate(p, Signal::Max, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(empirical_rate(p, Signal::Max, 9), DataError);

  // ties count as zero in the exploratory convention
  auto flat = make_series(3, 4, [](Signal, int, int) { return 7.0; });
  RecordPanel pf =
      extract_indicators(std::span<const DailyTemperatureSeries>(&flat, 1));
  CHECK(empirical_rate(pf, Signal::Max, 2) == doctest::Approx(0.0));

  // exactly half the cells record
  auto half = make_series(2, 1, [](Signal sig, int t, int) {
    if (t == 0) return 5.0;
    return sig == Signal::Max ? 6.0 : 4.0;
  });
  RecordPanel ph =
      extract_indicators(std::span<const DailyTemperatureSeries>(&half, 1));
  CHECK(empirical_rate(ph, Signal::Max, 2) == doctest::Approx(1.0));
  CHECK(empirical_rate(ph, Signal::Min, 2) == doctest::Approx(0.0));
}

TEST_CASE("log odds ratio") {
  Contingency2x2 zero;
  CHECK(log_odds_ratio(zero) == doctest::Approx(0.0));

  Contingency2x2 c;
  c.n[0][0] = 10;
  c.n[1][1] = 10;
  c.n[1][0] = 5;
  c.n[0][1] = 5;
  CHECK(log_odds_ratio(c) == doctest::Approx(1.293254329850105).epsilon(1e-12));

  Contingency2x2 d;
  d.n[1][0] = 10;
  d.n[0][1] = 10;
  CHECK(log_odds_ratio(d) ==
        doctest::Approx(-6.089044875446846).epsilon(1e-12));
}

TEST_CASE("log odds ratio antisymmetry") {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    Contingency2x2 c;
    c.n[0][0] = static_cast<long>(rng.raw() % 50);
    c.n[0][1] = static_cast<long>(rng.raw() % 50);
    c.n[1][0] = static_cast<long>(rng.raw() % 50);
    c.n[1][1] = static_cast<long>(rng.raw() % 50);
    Contingency2x2 swapped;
    swapped.n[0][0] = c.n[1][0];
    swapped.n[1][0] = c.n[0][0];
    swapped.n[0][1] = c.n[1][1];
    swapped.n[1][1] = c.n[0][1];
    CHECK(log_odds_ratio(swapped) ==
          doctest::Approx(-log_odds_ratio(c)).epsilon(1e-12));
  }
}

TEST_CASE("contingency builders count every contributing cell") {
  auto series = make_series(3, 4, [](Signal sig, int t, int d) {
    return std::cos(1.3 * t + 0.9 * d) + (sig == Signal::Max ? 2.0 : 0.0);
  });
  RecordPanel p =
      extract_indicators(std::span<const DailyTemperatureSeries>(&series, 1));
  CHECK(concurrence_counts(p, 2).total() == 4);
  CHECK(persistence_counts(p, Signal::Max, Signal::Min, 2).total() == 4);
}
