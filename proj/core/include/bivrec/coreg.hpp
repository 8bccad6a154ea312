#pragma once

#include <Eigen/Dense>
#include <span>

#include "bivrec/errors.hpp"

namespace bivrec {

// Lower-triangular coregionalisation map of the two latent unit-variance
// processes: v_max = a11 w1, v_min = a21 w1 + a22 w2.
struct CoregConstant {
  double a11 = 1.0;
  double a22 = 1.0;
  double a21 = 0.0;
};

inline Eigen::Vector2d coreg_apply(const CoregConstant& a, const Eigen::Vector2d& w) {
  return {a.a11 * w[0], a.a21 * w[0] + a.a22 * w[1]};
}

// Induced correlation between the two random effects, a21/sqrt(a21^2+a22^2);
// free of a11.
double induced_correlation(double a11, double a21, double a22);

// Relative proportion of spatial versus pure error per signal:
// (a11^2/(a11^2+1), (a21^2+a22^2)/(a21^2+a22^2+1)).
std::pair<double, double> spatial_share(double a11, double a21, double a22);

// Arithmetic grid mean, the Riemann approximation of a block integral.
double block_average(std::span<const double> per_cell_values);

// Site-indexed coregionalisation A(s). Diagonals are log-Gaussian processes
// (stored on the log scale), a21 a plain Gaussian process, each with mean
// z(s) beta on z(s) = (1, log(1+dist)) and exponential covariance of fixed
// decay phi_a shared across the three fields.
struct CoregField {
  Eigen::VectorXd log_a11, log_a22, a21;       // per-site states
  Eigen::Vector2d beta_a11 = Eigen::Vector2d::Zero();
  Eigen::Vector2d beta_a22 = Eigen::Vector2d::Zero();
  Eigen::Vector2d beta_a21 = Eigen::Vector2d::Zero();
  double sigma2_a11 = 1.0, sigma2_a22 = 1.0, sigma2_a21 = 1.0;
  double phi_a = 1.0 / 300.0;

  int n_sites() const { return static_cast<int>(log_a11.size()); }
  double a11(int i) const { return std::exp(log_a11[i]); }
  double a22(int i) const { return std::exp(log_a22[i]); }
  CoregConstant at(int i) const { return {a11(i), a22(i), a21[i]}; }
};

}  // namespace bivrec
