#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bivrec/predict.hpp"
#include "bivrec/records.hpp"

namespace bivrec {

enum class EventKind { Max = 0, Min = 1, Joint = 2 };

const char* event_name(EventKind e);

double harmonic_sum(int t1, int t2);  // sum of 1/t over [t1, t2]

// Spatial Jaccard index of the joint record event under conditional
// independence: p_max p_min / (p_max + p_min - p_max p_min).
double jaccard_from_probs(double p_max, double p_min);

// P(X > Y) - P(X < Y) estimated across paired draws; ties count for neither.
double signed_fraction(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct SurfaceRow {
  std::string cell_id;
  double x_km = 0.0, y_km = 0.0;
  std::string stat;
  double mean = 0.0, q05 = 0.0, q95 = 0.0;
};

struct TimeSeriesRow {
  int t = 0;
  std::string stat;
  double mean = 0.0, q05 = 0.0, q95 = 0.0;
};

struct CalendarRow {
  int year = 0, month = 0, day = 0;
  double statistic = 0.0;
};

// Per-cell, per-draw average-across-days count of records in a (year, day)
// window: the N summary. R divides by the stationary reference sum.
class CountAccumulator : public PredictiveSink {
 public:
  CountAccumulator(const GridSpec& grid, int n_draws, EventKind event, int t1,
                   int t2, int d1, int d2);

  void on_slice(const DaySlice& slice) override;

  // draws x cells matrix of N values.
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd r_values() const;  // N over the harmonic reference

  std::vector<SurfaceRow> n_surface(const std::string& stat_name) const;
  std::vector<SurfaceRow> r_surface(const std::string& stat_name) const;

 private:
  const GridSpec* grid_;
  EventKind event_;
  int t1_, t2_, d1_, d2_;
  Eigen::MatrixXd values_;
};

// Extent-of-record over the whole grid: per (draw, year, day) block mean of
// simulated indicators, with JJA-mean time series and calendar exports.
class ErsAccumulator : public PredictiveSink {
 public:
  ErsAccumulator(const GridSpec& grid, int n_draws, EventKind event,
                 std::vector<int> years, int n_days);

  void on_slice(const DaySlice& slice) override;

  // value per (draw, year-position, day d)
  double value(int draw, int year_pos, int d) const;
  // posterior mean of t * mean-over-days ERS per year, with 90% band.
  std::vector<TimeSeriesRow> scaled_yearly_series(const std::string& stat_name) const;
  std::vector<CalendarRow> calendar(int first_year) const;

 private:
  const GridSpec* grid_;
  EventKind event_;
  std::vector<int> years_;
  int n_days_;
  std::vector<Eigen::MatrixXd> per_draw_;  // per draw: years x days
  int year_pos(int t) const;
};

// Period-averaged Jaccard index per cell and draw, plus the block-averaged
// yearly time series.
class JaccardAccumulator : public PredictiveSink {
 public:
  JaccardAccumulator(const GridSpec& grid, int n_draws, std::vector<int> years,
                     int t1, int t2, int d1, int d2);

  void on_slice(const DaySlice& slice) override;
  void end_draw(int ordinal) override;

  const Eigen::MatrixXd& period_values() const { return period_values_; }
  std::vector<SurfaceRow> surface(const std::string& stat_name) const;
  std::vector<TimeSeriesRow> yearly_block_series(const std::string& stat_name) const;

 private:
  const GridSpec* grid_;
  std::vector<int> years_;
  int t1_, t2_, d1_, d2_;
  Eigen::MatrixXd period_values_;   // draws x cells (running mean over window)
  Eigen::MatrixXd period_counts_;
  Eigen::MatrixXd yearly_;          // draws x years (block mean over cells/days)
  Eigen::MatrixXd yearly_counts_;
  int year_pos(int t) const;
};

// Conditional-probability persistence ratio
// P(I_min(d)=1 | I_max(d-1)=1) / P(I_min(d)=1 | I_max(d-1)=0), pooled over
// days and draws; per cell and per whole-grid block, per year.
class PersistenceAccumulator : public PredictiveSink {
 public:
  PersistenceAccumulator(const GridSpec& grid, int n_draws, std::vector<int> years);

  void on_slice(const DaySlice& slice) override;

  // NaN marks an undefined ratio (a conditioning event never occurred).
  double cell_ratio(int year_pos, int cell) const;
  double block_ratio(int year_pos) const;
  std::vector<SurfaceRow> surface(int t, const std::string& stat_name) const;
  std::vector<TimeSeriesRow> yearly_block_series(const std::string& stat_name) const;

 private:
  const GridSpec* grid_;
  std::vector<int> years_;
  // counts indexed (year_pos, cell): conditioning event count and successes
  Eigen::MatrixXd n_cond1_, n_succ1_, n_cond0_, n_succ0_;
  Eigen::MatrixXd prev_;
  int year_pos(int t) const;
};

// Posterior mean and band of the record probability per cell for chosen days.
class ProbabilitySurfaceAccumulator : public PredictiveSink {
 public:
  ProbabilitySurfaceAccumulator(const GridSpec& grid, int n_draws,
                                std::vector<std::pair<int, int>> t_day_pairs);

  void on_slice(const DaySlice& slice) override;
  std::vector<SurfaceRow> surfaces() const;  // stats p_max/p_min/p_joint per day

 private:
  const GridSpec* grid_;
  std::vector<std::pair<int, int>> keys_;  // (t, d)
  std::vector<std::array<Eigen::MatrixXd, 3>> values_;  // per key: draws x cells
};

// Signed comparison surfaces: P(N_max > N_min) - P(<) over one window, and
// the joint-record change between a window and the preceding equal-length
// one. Built from CountAccumulator outputs.
std::vector<SurfaceRow> nmax_vs_nmin_surface(const GridSpec& grid,
                                             const CountAccumulator& n_max,
                                             const CountAccumulator& n_min,
                                             const std::string& stat_name);
std::vector<SurfaceRow> joint_change_surface(const GridSpec& grid,
                                             const CountAccumulator& late,
                                             const CountAccumulator& early,
                                             const std::string& stat_name);

void write_surface_csv(const std::string& path, const std::string& meta,
                       const std::vector<SurfaceRow>& rows);
void write_time_series_csv(const std::string& path, const std::string& meta,
                           const std::vector<TimeSeriesRow>& rows);
void write_calendar_csv(const std::string& path, const std::string& meta,
                        const std::vector<CalendarRow>& rows);

}  // namespace bivrec
