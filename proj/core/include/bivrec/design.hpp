#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bivrec/errors.hpp"
#include "bivrec/normal.hpp"
#include "bivrec/records.hpp"

namespace bivrec {

// Probit link. probit(1/t) is the long-term trend covariate; on the
// probability scale it is exactly the stationary record probability.
inline double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericalError("probit: p must lie in (0,1)");
  return norm_quantile(p);
}

inline double probit_inv(double z) { return norm_cdf(z); }

inline constexpr int kBivariateDesignDim = 8;
inline constexpr int kUnivariateDesignDim = 6;

using DesignRow = Eigen::Matrix<double, kBivariateDesignDim, 1>;
using CoefMatrix = Eigen::Matrix<double, 2, kBivariateDesignDim>;

// The k = 8 fixed-effects vector, in fixed order: intercept, previous-day
// max and min record indicators, log(1 + dist), the trend probit(1/t), and
// the trend's interactions with the three preceding terms.
DesignRow build_design_row(int t, int prev_max_mark, int prev_min_mark,
                           double dist_coast_km);

inline Eigen::Vector2d linear_predictor(const CoefMatrix& coef,
                                        const DesignRow& row,
                                        const Eigen::Vector2d& v) {
  return coef * row + v;
}

// Design column vocabulary shared by the bivariate model and the univariate
// reductions (which drop the other signal's autoregressive terms).
enum class DesignCol {
  Intercept,
  LagMax,
  LagMin,
  LogDist,
  Trend,
  TrendLagMax,
  TrendLagMin,
  TrendLogDist,
};

std::vector<DesignCol> bivariate_columns();
std::vector<DesignCol> univariate_columns(Signal signal);

inline bool is_indicator_column(DesignCol c) {
  return c == DesignCol::LagMax || c == DesignCol::LagMin ||
         c == DesignCol::TrendLagMax || c == DesignCol::TrendLagMin;
}

// Centring/scaling applied on the fitting scale. The intercept column is
// never touched; every other column is centred and scaled, indicator and
// interaction columns included. Coefficients are reported back-transformed
// to the raw covariate scale.
class Standardizer {
 public:
  // Fits means and scales from a design matrix whose first column is the
  // intercept. Zero-variance columns are an error, except columns flagged
  // indicator-like, which are left untouched (mean 0, scale 1). With strict
  // off, any degenerate column is left untouched instead; the sampler uses
  // that mode, where proper priors keep constant columns harmless.
  static Standardizer fit(const Eigen::MatrixXd& rows,
                          const std::vector<bool>& indicator_like,
                          bool strict = true);

  static Standardizer identity(int k);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  void apply_in_place(Eigen::MatrixXd& rows) const;

  // Maps fitted-scale coefficient rows back to the raw covariate scale so
  // that eta is preserved exactly: beta_j = beta'_j / s_j for j >= 1 and
  // beta_0 = beta'_0 - sum_j beta'_j m_j / s_j.
  Eigen::MatrixXd back_transform(const Eigen::MatrixXd& coef_std) const;

 private:
  Eigen::VectorXd mean_, scale_;
};

}  // namespace bivrec
