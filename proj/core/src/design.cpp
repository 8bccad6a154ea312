#include "bivrec/design.hpp"

#include <cmath>

namespace bivrec {

DesignRow build_design_row(int t, int prev_max_mark, int prev_min_mark,
                           double dist_coast_km) {
  if (t < 2) throw DataError("build_design_row: t must be >= 2");
  if (dist_coast_km < 0.0) throw DataError("build_design_row: negative distance");
  const double trend = probit(1.0 / t);
  const double ld = std::log1p(dist_coast_km);
  DesignRow row;
  row << 1.0, static_cast<double>(prev_max_mark), static_cast<double>(prev_min_mark),
      ld, trend, trend * prev_max_mark, trend * prev_min_mark, trend * ld;
  return row;
}

std::vector<DesignCol> bivariate_columns() {
  return {DesignCol::Intercept,   DesignCol::LagMax,      DesignCol::LagMin,
          DesignCol::LogDist,     DesignCol::Trend,       DesignCol::TrendLagMax,
          DesignCol::TrendLagMin, DesignCol::TrendLogDist};
}

std::vector<DesignCol> univariate_columns(Signal signal) {
  const DesignCol lag = signal == Signal::Max ? DesignCol::LagMax : DesignCol::LagMin;
  const DesignCol tlag =
      signal == Signal::Max ? DesignCol::TrendLagMax : DesignCol::TrendLagMin;
  return {DesignCol::Intercept, lag, DesignCol::LogDist,
          DesignCol::Trend,     tlag, DesignCol::TrendLogDist};
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows,
                               const std::vector<bool>& indicator_like,
                               bool strict) {
  const int k = static_cast<int>(rows.cols());
  if (static_cast<int>(indicator_like.size()) != k) {
    throw ConfigError("Standardizer: indicator flag size mismatch");
  }
  Standardizer s;
  s.mean_ = Eigen::VectorXd::Zero(k);
  s.scale_ = Eigen::VectorXd::Ones(k);
  const double n = static_cast<double>(rows.rows());
  for (int j = 1; j < k; ++j) {
    const double m = rows.col(j).mean();
    const double var = (rows.col(j).array() - m).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd <= 0.0) {
      if (indicator_like[j] || !strict) continue;
      throw DataError("Standardizer: zero-variance covariate column");
    }
    s.mean_[j] = m;
    s.scale_[j] = sd;
  }
  return s;
}

Standardizer Standardizer::identity(int k) {
  Standardizer s;
  s.mean_ = Eigen::VectorXd::Zero(k);
  s.scale_ = Eigen::VectorXd::Ones(k);
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out = rows;
  apply_in_place(out);
  return out;
}

void Standardizer::apply_in_place(Eigen::MatrixXd& rows) const {
  for (int j = 1; j < dim(); ++j) {
    rows.col(j) = (rows.col(j).array() - mean_[j]) / scale_[j];
  }
}

Eigen::MatrixXd Standardizer::back_transform(const Eigen::MatrixXd& coef_std) const {
  Eigen::MatrixXd out = coef_std;
  for (int r = 0; r < out.rows(); ++r) {
    double shift = 0.0;
    for (int j = 1; j < dim(); ++j) {
      out(r, j) = coef_std(r, j) / scale_[j];
      shift += out(r, j) * mean_[j];
    }
    out(r, 0) = coef_std(r, 0) - shift;
  }
  return out;
}

}  // namespace bivrec
