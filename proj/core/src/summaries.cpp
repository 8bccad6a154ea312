#include "bivrec/summaries.hpp"

#include <cmath>

#include "bivrec/csv.hpp"
#include "bivrec/stats.hpp"

namespace bivrec {

const char* event_name(EventKind e) {
  switch (e) {
    case EventKind::Max: return "max";
    case EventKind::Min: return "min";
    case EventKind::Joint: return "joint";
  }
  return "?";
}

double harmonic_sum(int t1, int t2) {
  if (t1 < 1 || t2 < t1) throw DataError("harmonic_sum: bad year range");
  double s = 0.0;
  for (int t = t1; t <= t2; ++t) s += 1.0 / t;
  return s;
}

double jaccard_from_probs(double p_max, double p_min) {
  const double both = p_max * p_min;
  const double denom = p_max + p_min - both;
  if (denom <= 0.0) throw NumericalError("jaccard_from_probs: zero union mass");
  return both / denom;
}

double signed_fraction(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() == 0) {
    throw DataError("signed_fraction: shape mismatch");
  }
  long gt = 0, lt = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > y[i]) ++gt;
    else if (x[i] < y[i]) ++lt;
  }
  return static_cast<double>(gt - lt) / static_cast<double>(x.size());
}

namespace {

double event_indicator(const DaySlice& s, int cell, EventKind e) {
  switch (e) {
    case EventKind::Max: return (*s.indicator)(cell, 0);
    case EventKind::Min: return (*s.indicator)(cell, 1);
    case EventKind::Joint:
      return (*s.indicator)(cell, 0) * (*s.indicator)(cell, 1);
  }
  return 0.0;
}

SurfaceRow make_row(const GridCell& c, const std::string& stat, double mean,
                    double q05, double q95) {
  return SurfaceRow{c.id, c.x_km, c.y_km, stat, mean, q05, q95};
}

std::vector<SurfaceRow> summarize_columns(const GridSpec& grid,
                                          const Eigen::MatrixXd& values,
                                          const std::string& stat) {
  std::vector<SurfaceRow> rows;
  std::vector<double> col(values.rows());
  for (int i = 0; i < grid.size(); ++i) {
    for (Eigen::Index b = 0; b < values.rows(); ++b) col[b] = values(b, i);
    std::sort(col.begin(), col.end());
    rows.push_back(make_row(grid.cells[i], stat, mean_of(col),
                            quantile_type7_sorted(col, 0.05),
                            quantile_type7_sorted(col, 0.95)));
  }
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------
CountAccumulator::CountAccumulator(const GridSpec& grid, int n_draws,
                                   EventKind event, int t1, int t2, int d1,
                                   int d2)
    : grid_(&grid), event_(event), t1_(t1), t2_(t2), d1_(d1), d2_(d2) {
  if (t1 < 1 || t2 < t1 || d1 < 1 || d2 < d1) {
    throw DataError("CountAccumulator: empty window");
  }
  values_ = Eigen::MatrixXd::Zero(n_draws, grid.size());
}

void CountAccumulator::on_slice(const DaySlice& s) {
  if (s.t < t1_ || s.t > t2_ || s.d < d1_ || s.d > d2_) return;
  const double denom = static_cast<double>(d2_ - d1_ + 1);
  for (int i = 0; i < grid_->size(); ++i) {
    values_(s.draw_ordinal, i) += event_indicator(s, i, event_) / denom;
  }
}

Eigen::MatrixXd CountAccumulator::r_values() const {
  return values_ / harmonic_sum(t1_, t2_);
}

std::vector<SurfaceRow> CountAccumulator::n_surface(const std::string& stat) const {
  return summarize_columns(*grid_, values_, stat);
}

std::vector<SurfaceRow> CountAccumulator::r_surface(const std::string& stat) const {
  return summarize_columns(*grid_, r_values(), stat);
}

// ---------------------------------------------------------------------------
ErsAccumulator::ErsAccumulator(const GridSpec& grid, int n_draws, EventKind event,
                               std::vector<int> years, int n_days)
    : grid_(&grid), event_(event), years_(std::move(years)), n_days_(n_days) {
  per_draw_.assign(n_draws,
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(years_.size()),
                                         n_days));
}

int ErsAccumulator::year_pos(int t) const {
  for (std::size_t i = 0; i < years_.size(); ++i) {
    if (years_[i] == t) return static_cast<int>(i);
  }
  return -1;
}

void ErsAccumulator::on_slice(const DaySlice& s) {
  if (s.d < 1) return;
  const int yp = year_pos(s.t);
  if (yp < 0) return;
  double sum = 0.0;
  for (int i = 0; i < grid_->size(); ++i) sum += event_indicator(s, i, event_);
  per_draw_[s.draw_ordinal](yp, s.d - 1) = sum / grid_->size();
}

double ErsAccumulator::value(int draw, int yp, int d) const {
  return per_draw_[draw](yp, d - 1);
}

std::vector<TimeSeriesRow> ErsAccumulator::scaled_yearly_series(
    const std::string& stat) const {
  std::vector<TimeSeriesRow> rows;
  std::vector<double> vals(per_draw_.size());
  for (std::size_t yp = 0; yp < years_.size(); ++yp) {
    const int t = years_[yp];
    for (std::size_t b = 0; b < per_draw_.size(); ++b) {
      vals[b] = t * per_draw_[b].row(static_cast<Eigen::Index>(yp)).mean();
    }
    std::sort(vals.begin(), vals.end());
    rows.push_back(TimeSeriesRow{t, stat, mean_of(vals),
                                 quantile_type7_sorted(vals, 0.05),
                                 quantile_type7_sorted(vals, 0.95)});
  }
  return rows;
}

std::vector<CalendarRow> ErsAccumulator::calendar(int first_year) const {
  std::vector<CalendarRow> rows;
  for (std::size_t yp = 0; yp < years_.size(); ++yp) {
    for (int d = 1; d <= n_days_; ++d) {
      double mean = 0.0;
      for (const auto& m : per_draw_) mean += m(static_cast<Eigen::Index>(yp), d - 1);
      mean /= static_cast<double>(per_draw_.size());
      int month = 0, day = 0;
      month_day_from_label(kSeedDayLabel + d, &month, &day);
      rows.push_back(CalendarRow{first_year + years_[yp] - 1, month, day, mean});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
JaccardAccumulator::JaccardAccumulator(const GridSpec& grid, int n_draws,
                                       std::vector<int> years, int t1, int t2,
                                       int d1, int d2)
    : grid_(&grid), years_(std::move(years)), t1_(t1), t2_(t2), d1_(d1), d2_(d2) {
  period_values_ = Eigen::MatrixXd::Zero(n_draws, grid.size());
  period_counts_ = Eigen::MatrixXd::Zero(n_draws, grid.size());
  yearly_ = Eigen::MatrixXd::Zero(n_draws, static_cast<Eigen::Index>(years_.size()));
  yearly_counts_ = yearly_;
}

int JaccardAccumulator::year_pos(int t) const {
  for (std::size_t i = 0; i < years_.size(); ++i) {
    if (years_[i] == t) return static_cast<int>(i);
  }
  return -1;
}

void JaccardAccumulator::on_slice(const DaySlice& s) {
  if (s.d < 1 || s.prob == nullptr) return;
  const int yp = year_pos(s.t);
  const bool in_window = s.t >= t1_ && s.t <= t2_ && s.d >= d1_ && s.d <= d2_;
  if (yp < 0 && !in_window) return;
  double block_sum = 0.0;
  for (int i = 0; i < grid_->size(); ++i) {
    const double j = jaccard_from_probs((*s.prob)(i, 0), (*s.prob)(i, 1));
    block_sum += j;
    if (in_window) {
      period_values_(s.draw_ordinal, i) += j;
      period_counts_(s.draw_ordinal, i) += 1.0;
    }
  }
  if (yp >= 0) {
    yearly_(s.draw_ordinal, yp) += block_sum / grid_->size();
    yearly_counts_(s.draw_ordinal, yp) += 1.0;
  }
}

void JaccardAccumulator::end_draw(int ordinal) {
  for (int i = 0; i < grid_->size(); ++i) {
    if (period_counts_(ordinal, i) > 0.0) {
      period_values_(ordinal, i) /= period_counts_(ordinal, i);
      period_counts_(ordinal, i) = -1.0;  // normalized
    }
  }
  for (Eigen::Index y = 0; y < yearly_.cols(); ++y) {
    if (yearly_counts_(ordinal, y) > 0.0) {
      yearly_(ordinal, y) /= yearly_counts_(ordinal, y);
      yearly_counts_(ordinal, y) = -1.0;
    }
  }
}

std::vector<SurfaceRow> JaccardAccumulator::surface(const std::string& stat) const {
  return summarize_columns(*grid_, period_values_, stat);
}

std::vector<TimeSeriesRow> JaccardAccumulator::yearly_block_series(
    const std::string& stat) const {
  std::vector<TimeSeriesRow> rows;
  std::vector<double> vals(yearly_.rows());
  for (std::size_t yp = 0; yp < years_.size(); ++yp) {
    for (Eigen::Index b = 0; b < yearly_.rows(); ++b) {
      vals[b] = yearly_(b, static_cast<Eigen::Index>(yp));
    }
    std::sort(vals.begin(), vals.end());
    rows.push_back(TimeSeriesRow{years_[yp], stat, mean_of(vals),
                                 quantile_type7_sorted(vals, 0.05),
                                 quantile_type7_sorted(vals, 0.95)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
PersistenceAccumulator::PersistenceAccumulator(const GridSpec& grid, int n_draws,
                                               std::vector<int> years)
    : grid_(&grid), years_(std::move(years)) {
  (void)n_draws;
  const auto ny = static_cast<Eigen::Index>(years_.size());
  n_cond1_ = Eigen::MatrixXd::Zero(ny, grid.size());
  n_succ1_ = Eigen::MatrixXd::Zero(ny, grid.size());
  n_cond0_ = Eigen::MatrixXd::Zero(ny, grid.size());
  n_succ0_ = Eigen::MatrixXd::Zero(ny, grid.size());
  prev_ = Eigen::MatrixXd::Zero(grid.size(), 2);
}

int PersistenceAccumulator::year_pos(int t) const {
  for (std::size_t i = 0; i < years_.size(); ++i) {
    if (years_[i] == t) return static_cast<int>(i);
  }
  return -1;
}

void PersistenceAccumulator::on_slice(const DaySlice& s) {
  const int yp = year_pos(s.t);
  if (yp < 0) return;
  if (s.d == 0) {
    prev_ = *s.indicator;
    return;
  }
  for (int i = 0; i < grid_->size(); ++i) {
    const bool cond = prev_(i, 0) > 0.5;  // yesterday's max record
    const bool succ = (*s.indicator)(i, 1) > 0.5;
    if (cond) {
      n_cond1_(yp, i) += 1.0;
      if (succ) n_succ1_(yp, i) += 1.0;
    } else {
      n_cond0_(yp, i) += 1.0;
      if (succ) n_succ0_(yp, i) += 1.0;
    }
  }
  prev_ = *s.indicator;
}

double PersistenceAccumulator::cell_ratio(int yp, int cell) const {
  const double c1 = n_cond1_(yp, cell), c0 = n_cond0_(yp, cell);
  if (c1 == 0.0 || c0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double p1 = n_succ1_(yp, cell) / c1;
  const double p0 = n_succ0_(yp, cell) / c0;
  if (p0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return p1 / p0;
}

double PersistenceAccumulator::block_ratio(int yp) const {
  const double c1 = n_cond1_.row(yp).sum(), c0 = n_cond0_.row(yp).sum();
  if (c1 == 0.0 || c0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double p1 = n_succ1_.row(yp).sum() / c1;
  const double p0 = n_succ0_.row(yp).sum() / c0;
  if (p0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return p1 / p0;
}

std::vector<SurfaceRow> PersistenceAccumulator::surface(
    int t, const std::string& stat) const {
  const int yp = year_pos(t);
  if (yp < 0) throw DataError("persistence surface: year not simulated");
  std::vector<SurfaceRow> rows;
  for (int i = 0; i < grid_->size(); ++i) {
    const double r = cell_ratio(yp, i);
    rows.push_back(make_row(grid_->cells[i], stat, r, r, r));
  }
  return rows;
}

std::vector<TimeSeriesRow> PersistenceAccumulator::yearly_block_series(
    const std::string& stat) const {
  std::vector<TimeSeriesRow> rows;
  for (std::size_t yp = 0; yp < years_.size(); ++yp) {
    const double r = block_ratio(static_cast<int>(yp));
    rows.push_back(TimeSeriesRow{years_[yp], stat, r, r, r});
  }
  return rows;
}

// ---------------------------------------------------------------------------
ProbabilitySurfaceAccumulator::ProbabilitySurfaceAccumulator(
    const GridSpec& grid, int n_draws, std::vector<std::pair<int, int>> t_day_pairs)
    : grid_(&grid), keys_(std::move(t_day_pairs)) {
  values_.resize(keys_.size());
  for (auto& v : values_) {
    for (auto& m : v) m = Eigen::MatrixXd::Zero(n_draws, grid.size());
  }
}

void ProbabilitySurfaceAccumulator::on_slice(const DaySlice& s) {
  if (s.prob == nullptr) return;
  for (std::size_t kidx = 0; kidx < keys_.size(); ++kidx) {
    if (keys_[kidx].first != s.t || keys_[kidx].second != s.d) continue;
    for (int i = 0; i < grid_->size(); ++i) {
      values_[kidx][0](s.draw_ordinal, i) = (*s.prob)(i, 0);
      values_[kidx][1](s.draw_ordinal, i) = (*s.prob)(i, 1);
      values_[kidx][2](s.draw_ordinal, i) = (*s.prob)(i, 0) * (*s.prob)(i, 1);
    }
  }
}

std::vector<SurfaceRow> ProbabilitySurfaceAccumulator::surfaces() const {
  std::vector<SurfaceRow> rows;
  const char* names[3] = {"p_max", "p_min", "p_joint"};
  for (std::size_t kidx = 0; kidx < keys_.size(); ++kidx) {
    const std::string tag = "_t" + std::to_string(keys_[kidx].first) + "_d" +
                            std::to_string(keys_[kidx].second);
    for (int e = 0; e < 3; ++e) {
      auto part = summarize_columns(*grid_, values_[kidx][e], names[e] + tag);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
std::vector<SurfaceRow> nmax_vs_nmin_surface(const GridSpec& grid,
                                             const CountAccumulator& n_max,
                                             const CountAccumulator& n_min,
                                             const std::string& stat) {
  std::vector<SurfaceRow> rows;
  for (int i = 0; i < grid.size(); ++i) {
    const double v = signed_fraction(n_max.values().col(i), n_min.values().col(i));
    rows.push_back(make_row(grid.cells[i], stat, v, v, v));
  }
  return rows;
}

std::vector<SurfaceRow> joint_change_surface(const GridSpec& grid,
                                             const CountAccumulator& late,
                                             const CountAccumulator& early,
                                             const std::string& stat) {
  std::vector<SurfaceRow> rows;
  for (int i = 0; i < grid.size(); ++i) {
    const double v = signed_fraction(late.values().col(i), early.values().col(i));
    rows.push_back(make_row(grid.cells[i], stat, v, v, v));
  }
  return rows;
}

// ---------------------------------------------------------------------------
void write_surface_csv(const std::string& path, const std::string& meta,
                       const std::vector<SurfaceRow>& rows) {
  CsvWriter w(path, meta, "cell_id,x_km,y_km,stat,mean,q05,q95");
  for (const auto& r : rows) {
    w.write_row({r.cell_id, fmt_short(r.x_km), fmt_short(r.y_km), r.stat,
                 fmt_short(r.mean), fmt_short(r.q05), fmt_short(r.q95)});
  }
  w.close();
}

void write_time_series_csv(const std::string& path, const std::string& meta,
                           const std::vector<TimeSeriesRow>& rows) {
  CsvWriter w(path, meta, "t,stat,mean,q05,q95");
  for (const auto& r : rows) {
    w.write_row({std::to_string(r.t), r.stat, fmt_short(r.mean),
                 fmt_short(r.q05), fmt_short(r.q95)});
  }
  w.close();
}

void write_calendar_csv(const std::string& path, const std::string& meta,
                        const std::vector<CalendarRow>& rows) {
  CsvWriter w(path, meta, "year,month,day,statistic");
  for (const auto& r : rows) {
    w.write_row({std::to_string(r.year), std::to_string(r.month),
                 std::to_string(r.day), fmt_short(r.statistic)});
  }
  w.close();
}

}  // namespace bivrec
