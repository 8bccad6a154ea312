#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bivrec/mcmc.hpp"

namespace bivrec {

// Station partition for k-fold cross-validation.
struct FoldPlan {
  std::vector<std::vector<int>> groups;

  // Seeded random partition into n_groups of near-equal size.
  static FoldPlan seeded(int n_stations, int n_groups, std::uint64_t seed);
};

struct JaccardScore {
  Eigen::VectorXd per_draw;
  double mean = 0.0;
};

// Bayesian Jaccard index: per draw, TP = sum of p over observed-record cells,
// FP = sum of p over non-record cells, FN = sum of (1-p) over record cells.
// Tied cells must be excluded before the call.
JaccardScore bayes_jaccard(const Eigen::MatrixXd& probs_per_draw,
                           std::span<const std::uint8_t> observed);

// Rank-based AUC (ties share rank mass) and the Brier score.
std::pair<double, double> auc_brier(std::span<const double> probs,
                                    std::span<const std::uint8_t> labels);

struct CvOptions {
  int t_split = 0;   // last year of the early period; 0 = first half of 2..T
  int m0_draws = 1;  // the stationary model is deterministic
};

struct CvRow {
  std::string model;
  std::string event;    // max | min | joint
  std::string period;   // J1 | J2
  double j_mean = 0.0;  // fold-averaged posterior-mean Jaccard
};

// K-fold cross-validation with one-step-ahead prediction: each fold refits
// on the retained stations, predicts held-out conditional record
// probabilities given the held-out stations' observed previous-day
// indicators, and scores them with the Bayesian Jaccard index over the two
// year periods. Anisotropic variants krige the climate covariate for the
// held-out sites from the retained ones.
std::vector<CvRow> run_cv(const RecordPanel& panel,
                          const std::vector<StationMeta>& stations,
                          const SamplerConfig& config, const FoldPlan& plan,
                          const CvOptions& opts = {});

// CSV layout mirroring the paper's comparison table.
void write_cv_report_csv(const std::string& path, const std::vector<CvRow>& rows,
                         const std::string& meta);

}  // namespace bivrec
