#include "bivrec/records.hpp"

#include <cmath>

namespace bivrec {

std::vector<MarkCode> extract_signal_marks(const DailyTemperatureSeries& series,
                                           Signal signal) {
  const SeriesLayout& lay = series.layout;
  if (lay.n_years == 0) throw DataError("extract_indicators: empty series");
  if (lay.n_years < 2) throw DataError("extract_indicators: need T >= 2 years");

  std::vector<MarkCode> out(lay.cells_per_site(), kMarkZero);
  const std::vector<double>& vals = series.values[static_cast<int>(signal)];

  for (int d = 0; d < lay.days_per_year(); ++d) {
    // Running weak-record value and the count of weak records attaining it.
    double running = -std::numeric_limits<double>::infinity();
    bool have_value = false;
    MarkCode weak_count = 0;
    for (int t = 0; t < lay.n_years; ++t) {
      const double x = vals[lay.cell(t, d)];
      const bool present = std::isfinite(x);
      MarkCode mark = kMarkZero;
      if (t == 0) {
        mark = kMarkOne;  // I_1 = 1 by definition, missing or not
        if (present) {
          running = x;
          have_value = true;
          weak_count = 1;
        }
      } else if (present) {
        if (!have_value || x > running) {
          mark = kMarkOne;
          running = x;
          have_value = true;
          weak_count = 1;
        } else if (x == running) {
          ++weak_count;
          mark = weak_count;  // r-tied, r = weak_count >= 2
        }
      }
      // Missing beyond t = 1 stays ZERO and leaves the running state inert.
      out[lay.cell(t, d)] = mark;
    }
  }
  return out;
}

RecordPanel extract_indicators(std::span<const DailyTemperatureSeries> stations) {
  if (stations.empty()) throw DataError("extract_indicators: no stations");
  RecordPanel panel;
  panel.layout = stations[0].layout;
  for (const auto& st : stations) {
    if (!(st.layout == panel.layout)) {
      throw DataError("extract_indicators: stations disagree on the study window");
    }
    panel.site_ids.push_back(st.meta.id);
  }
  const long per_site = panel.layout.cells_per_site();
  for (int s = 0; s < 2; ++s) {
    panel.marks[s].resize(per_site * stations.size());
  }
  for (std::size_t i = 0; i < stations.size(); ++i) {
    for (Signal sig : {Signal::Max, Signal::Min}) {
      auto m = extract_signal_marks(stations[i], sig);
      std::copy(m.begin(), m.end(),
                panel.marks[static_cast<int>(sig)].begin() + per_site * i);
    }
  }
  return panel;
}

JointPanel joint_panel(const RecordPanel& panel) {
  if (panel.marks[0].size() != panel.marks[1].size()) {
    throw DataError("joint_panel: signal shapes differ");
  }
  JointPanel jp;
  jp.layout = panel.layout;
  jp.site_ids = panel.site_ids;
  jp.marks.resize(panel.marks[0].size());
  for (std::size_t i = 0; i < jp.marks.size(); ++i) {
    jp.marks[i] = JointMark{panel.marks[0][i], panel.marks[1][i]};
  }
  return jp;
}

namespace {

void check_year(const RecordPanel& panel, int t) {
  if (t < 1 || t > panel.layout.n_years) {
    throw DataError("year index t out of range");
  }
}

}  // namespace

double empirical_rate(const RecordPanel& panel, Signal signal, int t) {
  check_year(panel, t);
  const SeriesLayout& lay = panel.layout;
  long ones = 0;
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int d = 1; d <= lay.n_days; ++d) {
      if (panel.mark(signal, i, t - 1, d) == kMarkOne) ++ones;
    }
  }
  return static_cast<double>(ones) /
         (static_cast<double>(panel.n_sites()) * lay.n_days);
}

Contingency2x2 concurrence_counts(const RecordPanel& panel, int t) {
  check_year(panel, t);
  Contingency2x2 c;
  const SeriesLayout& lay = panel.layout;
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int d = 1; d <= lay.n_days; ++d) {
      const int j = panel.mark(Signal::Max, i, t - 1, d) == kMarkOne ? 1 : 0;
      const int k = panel.mark(Signal::Min, i, t - 1, d) == kMarkOne ? 1 : 0;
      ++c.n[j][k];
    }
  }
  return c;
}

Contingency2x2 persistence_counts(const RecordPanel& panel, Signal response,
                                  Signal conditioning, int t) {
  check_year(panel, t);
  Contingency2x2 c;
  const SeriesLayout& lay = panel.layout;
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int d = 1; d <= lay.n_days; ++d) {
      const int j = panel.mark(response, i, t - 1, d) == kMarkOne ? 1 : 0;
      const int jp = panel.mark(conditioning, i, t - 1, d - 1) == kMarkOne ? 1 : 0;
      ++c.n[j][jp];
    }
  }
  return c;
}

double log_odds_ratio(const Contingency2x2& c) {
  return std::log(((c.n[0][0] + 0.5) * (c.n[1][1] + 0.5)) /
                  ((c.n[1][0] + 0.5) * (c.n[0][1] + 0.5)));
}

}  // namespace bivrec
