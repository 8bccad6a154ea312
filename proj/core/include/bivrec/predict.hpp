#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bivrec/gp.hpp"
#include "bivrec/mcmc.hpp"
#include "bivrec/records.hpp"

namespace bivrec {

struct GridCell {
  std::string id;
  double x_km = 0.0;
  double y_km = 0.0;
  double dist_coast_km = 0.0;
  double sx = std::numeric_limits<double>::quiet_NaN();

  bool has_sx() const { return std::isfinite(sx); }
};

struct GridSpec {
  std::vector<GridCell> cells;
  double resolution_km = 25.0;

  int size() const { return static_cast<int>(cells.size()); }
};

// Clamped station proportions of records per (year, signal) on the seed day;
// ties count as zero. Probabilities are pulled into [eps, 1-eps].
Eigen::MatrixXd seed_day_probabilities(const RecordPanel& panel, double eps = 0.01);

// Everything prediction needs from a finished fit.
struct FitArtifacts {
  VariantSpec variant;
  SeriesLayout layout;
  std::vector<StationMeta> stations;
  Eigen::VectorXd station_covariate;  // log(s_x) used during the fit (aniso)
  PosteriorDraws draws;
  Eigen::MatrixXd seed_prob;          // n_years x 2
  double covariate_krige_phi = 1.0 / 300.0;  // posterior-mean spatial decay
  double phi_a = 1.0 / 300.0;         // fixed decay of the A(s) fields
  int m0_draws = 200;                 // predictive replicates for the M0 variant
};

// One simulated day over the grid, streamed to consumers. Seed-day slices
// (d = 0) carry indicators only.
struct DaySlice {
  int draw_ordinal = 0;
  int t = 0;  // 1-based year
  int d = 0;  // 0 = seed day, 1..n_days summer days
  int day_label = 0;
  const Eigen::MatrixXd* prob = nullptr;  // cells x 2, null on the seed day
  const Eigen::MatrixXd* indicator = nullptr;  // cells x 2 of {0,1}
};

class PredictiveSink {
 public:
  virtual ~PredictiveSink() = default;
  virtual void begin_draw(int ordinal) { (void)ordinal; }
  virtual void on_slice(const DaySlice& slice) = 0;
  virtual void end_draw(int ordinal) { (void)ordinal; }
};

// Fills absent grid covariate values by simple kriging from the stations.
Eigen::VectorXd krige_grid_covariate(const GridSpec& grid,
                                     const FitArtifacts& art);

// Day-sequential posterior-predictive simulation over the grid for the given
// years (each must lie in [2, T]). Draw ordinals run over every archived-w
// draw of every chain, in chain order. Deterministic per seed.
void simulate_posterior_predictive(const FitArtifacts& art, const GridSpec& grid,
                                   std::span<const int> years, std::uint64_t seed,
                                   std::span<PredictiveSink* const> sinks);

int predictive_draw_count(const FitArtifacts& art);

}  // namespace bivrec
