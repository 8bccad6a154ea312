#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bivrec/calendar.hpp"
#include "bivrec/errors.hpp"

namespace bivrec {

enum class Signal : int { Max = 0, Min = 1 };

inline const char* signal_name(Signal s) {
  return s == Signal::Max ? "max" : "min";
}

// Common (year, day) window shared by series and panels. Day index d runs
// 0..n_days where d = 0 is the seed day (label 151) and d = 1..n_days are the
// modelled summer days (labels 152..151+n_days, n_days <= 92).
struct SeriesLayout {
  int first_year = 1;
  int n_years = 0;           // T
  int n_days = kSummerDays;  // modelled summer days, excluding the seed day

  int days_per_year() const { return n_days + 1; }
  int day_label(int d) const { return kSeedDayLabel + d; }
  long cells_per_site() const {
    return static_cast<long>(n_years) * days_per_year();
  }
  long cell(int year_idx, int d) const {
    return static_cast<long>(year_idx) * days_per_year() + d;
  }
  bool operator==(const SeriesLayout&) const = default;
};

struct StationMeta {
  std::string id;
  double x_km = 0.0;
  double y_km = 0.0;
  double dist_coast_km = 0.0;
  double sx = std::numeric_limits<double>::quiet_NaN();  // JJA sd of Tx; may be absent

  bool has_sx() const { return std::isfinite(sx); }
};

// Paired daily max/min temperature series over the study window. NaN encodes
// a missing observation; present values are finite and compared at their
// stored precision, never with an epsilon.
struct DailyTemperatureSeries {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  StationMeta meta;
  SeriesLayout layout;
  std::array<std::vector<double>, 2> values;  // [signal][cell]

  void allocate() {
    values[0].assign(layout.cells_per_site(), kMissing);
    values[1].assign(layout.cells_per_site(), kMissing);
  }
  double value(Signal s, int year_idx, int d) const {
    return values[static_cast<int>(s)][layout.cell(year_idx, d)];
  }
  bool missing(Signal s, int year_idx, int d) const {
    return !std::isfinite(value(s, year_idx, d));
  }
};

// Record mark per cell: 0 = no record, 1 = record, r >= 2 = r-tied record
// (the observation equals the value shared by r-1 preceding weak records).
using MarkCode = std::uint32_t;

inline constexpr MarkCode kMarkZero = 0;
inline constexpr MarkCode kMarkOne = 1;

struct RecordPanel {
  SeriesLayout layout;
  std::vector<std::string> site_ids;
  std::array<std::vector<MarkCode>, 2> marks;  // [signal][site * cells + cell]

  int n_sites() const { return static_cast<int>(site_ids.size()); }
  long index(int site, int year_idx, int d) const {
    return static_cast<long>(site) * layout.cells_per_site() +
           layout.cell(year_idx, d);
  }
  MarkCode mark(Signal s, int site, int year_idx, int d) const {
    return marks[static_cast<int>(s)][index(site, year_idx, d)];
  }
  MarkCode& mark(Signal s, int site, int year_idx, int d) {
    return marks[static_cast<int>(s)][index(site, year_idx, d)];
  }
};

// Joint bivariate mark. Encodes the per-signal codes; the joint indicator is
// the product of the marginal ones, so it is ZERO as soon as either marginal
// is ZERO, ONE when both are ONE, and otherwise a tied product resolved as
// independent Bernoulli(1/r) factors at sampling time.
struct JointMark {
  MarkCode rx = 0;
  MarkCode rn = 0;

  bool is_zero() const { return rx == 0 || rn == 0; }
  bool is_one() const { return rx == 1 && rn == 1; }
  bool is_tied_product() const { return !is_zero() && !is_one(); }
  // P(joint = 1 | marks) for non-zero marks.
  double success_prob() const {
    return 1.0 / (static_cast<double>(rx) * static_cast<double>(rn));
  }
};

struct JointPanel {
  SeriesLayout layout;
  std::vector<std::string> site_ids;
  std::vector<JointMark> marks;

  long index(int site, int year_idx, int d) const {
    return static_cast<long>(site) * layout.cells_per_site() +
           layout.cell(year_idx, d);
  }
};

// 2x2 contingency table with cells n[j][k].
struct Contingency2x2 {
  std::array<std::array<long, 2>, 2> n = {{{0, 0}, {0, 0}}};
  long total() const { return n[0][0] + n[0][1] + n[1][0] + n[1][1]; }
};

// Calendar-day record marks of one station and signal. Strict records become
// ONE, equality with the running weak-record value becomes TIED(r), missing
// observations count as -infinity (never a record, never updating the running
// value) except at t = 1, which is ONE unconditionally.
std::vector<MarkCode> extract_signal_marks(const DailyTemperatureSeries& series,
                                           Signal signal);

// Both signals across a station set; site order follows the input order.
RecordPanel extract_indicators(std::span<const DailyTemperatureSeries> stations);

JointPanel joint_panel(const RecordPanel& panel);

// Empirical record rate of year t (1-based) over sites and JJA days. Ties
// count as zero, the exploratory-analysis convention.
double empirical_rate(const RecordPanel& panel, Signal signal, int t);

// Concurrence table n_{jk}: j = max-record, k = min-record, over sites and
// JJA days of year t. Ties count as zero.
Contingency2x2 concurrence_counts(const RecordPanel& panel, int t);

// Persistence table n_{j.|j'.}: response signal on day l vs conditioning
// signal on day l-1 (seed day included as lag), over sites and JJA days.
Contingency2x2 persistence_counts(const RecordPanel& panel, Signal response,
                                  Signal conditioning, int t);

// Log odds ratio with the 0.5 continuity correction.
double log_odds_ratio(const Contingency2x2& counts);

}  // namespace bivrec
