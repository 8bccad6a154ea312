#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bivrec/errors.hpp"
#include "bivrec/rng.hpp"

namespace bivrec {

// Exponential correlation kernel on planar km coordinates, optionally times
// an exponential in a 1-d climate-covariate distance. Latent processes carry
// unit variance, so the diagonal is exactly 1.
struct KernelSpec {
  bool aniso = false;
  double phi = 0.01;    // spatial decay, 1/km; effective range 3/phi
  double phi_x = 0.0;   // covariate decay (aniso only)

  static KernelSpec iso(double phi_) { return {false, phi_, 0.0}; }
  static KernelSpec anisotropic(double phi_, double phi_x_) {
    return {true, phi_, phi_x_};
  }
};

struct GpSite {
  double x = 0.0;
  double y = 0.0;
  double covariate = 0.0;  // x(s) = log(s_x); used only by aniso kernels
};

double kernel_value(const KernelSpec& k, const GpSite& a, const GpSite& b);

Eigen::MatrixXd cov_matrix(const KernelSpec& k, std::span<const GpSite> sites);

Eigen::MatrixXd cross_cov(const KernelSpec& k, std::span<const GpSite> rows,
                          std::span<const GpSite> cols);

// Cholesky with the artifact's jitter ladder: on failure add 1e-10 to the
// diagonal, escalate tenfold up to 1e-8, then raise NumericalError.
struct CholeskyResult {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  double log_det() const {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
};

CholeskyResult chol_with_jitter(const Eigen::MatrixXd& m);

// Mean-zero draw with covariance cov_matrix(kernel, sites).
Eigen::VectorXd sample_gp(const KernelSpec& k, std::span<const GpSite> sites,
                          Rng& rng);

// Conditional-normal prediction for a mean-zero unit-variance process.
struct KrigeSystem {
  Eigen::MatrixXd weights;    // C_no C_oo^{-1}, m x n
  Eigen::MatrixXd cond_cov;   // C_nn - C_no C_oo^{-1} C_on
  CholeskyResult cond_chol;   // factor of cond_cov (jittered when needed)

  Eigen::VectorXd mean(const Eigen::VectorXd& obs_values) const {
    return weights * obs_values;
  }
  Eigen::VectorXd draw(const Eigen::VectorXd& obs_values, Rng& rng) const;
};

KrigeSystem krige_system(const KernelSpec& k, std::span<const GpSite> obs,
                         std::span<const GpSite> target);

struct KrigeResult {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

KrigeResult krige(const KernelSpec& k, std::span<const GpSite> obs,
                  const Eigen::VectorXd& obs_values,
                  std::span<const GpSite> target);

// Simple kriging of a deterministic covariate field: centre the observed
// values, krige the residual with an isotropic spatial kernel of decay phi,
// add the sample mean back. Deterministic per station set.
Eigen::VectorXd simple_krige_covariate(const Eigen::VectorXd& obs_values,
                                       std::span<const GpSite> obs,
                                       std::span<const GpSite> target,
                                       double phi);

}  // namespace bivrec
