#include "bivrec/gp.hpp"

#include <cmath>

namespace bivrec {

double kernel_value(const KernelSpec& k, const GpSite& a, const GpSite& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  double v = std::exp(-k.phi * std::sqrt(dx * dx + dy * dy));
  if (k.aniso) {
    v *= std::exp(-k.phi_x * std::abs(a.covariate - b.covariate));
  }
  return v;
}

Eigen::MatrixXd cov_matrix(const KernelSpec& k, std::span<const GpSite> sites) {
  const int n = static_cast<int>(sites.size());
  if (n < 1) throw DataError("cov_matrix: need at least one site");
  if (!(k.phi > 0.0) || (k.aniso && !(k.phi_x > 0.0))) {
    throw ConfigError("cov_matrix: decay parameters must be positive");
  }
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      c(i, j) = c(j, i) = kernel_value(k, sites[i], sites[j]);
    }
  }
  return c;
}

Eigen::MatrixXd cross_cov(const KernelSpec& k, std::span<const GpSite> rows,
                          std::span<const GpSite> cols) {
  Eigen::MatrixXd c(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      c(i, j) = kernel_value(k, rows[i], cols[j]);
    }
  }
  return c;
}

CholeskyResult chol_with_jitter(const Eigen::MatrixXd& m) {
  CholeskyResult r;
  r.llt.compute(m);
  if (r.llt.info() == Eigen::Success) return r;
  const int n = static_cast<int>(m.rows());
  for (double jitter = 1e-10; jitter <= 1e-8 * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd mj = m;
    mj.diagonal().array() += jitter;
    r.llt.compute(mj);
    if (r.llt.info() == Eigen::Success) {
      r.jitter = jitter;
      return r;
    }
    (void)n;
  }
  throw NumericalError("Cholesky failed after the jitter ladder; duplicate sites?");
}

Eigen::VectorXd sample_gp(const KernelSpec& k, std::span<const GpSite> sites,
                          Rng& rng) {
  const CholeskyResult c = chol_with_jitter(cov_matrix(k, sites));
  Eigen::VectorXd z(sites.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return c.llt.matrixL() * z;
}

Eigen::VectorXd KrigeSystem::draw(const Eigen::VectorXd& obs_values, Rng& rng) const {
  Eigen::VectorXd z(cond_cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean(obs_values) + cond_chol.llt.matrixL() * z;
}

KrigeSystem krige_system(const KernelSpec& k, std::span<const GpSite> obs,
                         std::span<const GpSite> target) {
  const Eigen::MatrixXd c_oo = cov_matrix(k, obs);
  const CholeskyResult oo = chol_with_jitter(c_oo);
  const Eigen::MatrixXd c_no = cross_cov(k, target, obs);

  KrigeSystem sys;
  sys.weights = oo.llt.solve(c_no.transpose()).transpose();
  Eigen::MatrixXd cond = cov_matrix(k, target) - sys.weights * c_no.transpose();
  // Conditioning can leave tiny negative ripple on the diagonal.
  cond = 0.5 * (cond + cond.transpose());
  sys.cond_cov = cond;
  sys.cond_chol = chol_with_jitter(cond);
  return sys;
}

KrigeResult krige(const KernelSpec& k, std::span<const GpSite> obs,
                  const Eigen::VectorXd& obs_values,
                  std::span<const GpSite> target) {
  if (obs_values.size() != static_cast<Eigen::Index>(obs.size())) {
    throw DataError("krige: observation shape mismatch");
  }
  KrigeSystem sys = krige_system(k, obs, target);
  return KrigeResult{sys.mean(obs_values), std::move(sys.cond_cov)};
}

Eigen::VectorXd simple_krige_covariate(const Eigen::VectorXd& obs_values,
                                       std::span<const GpSite> obs,
                                       std::span<const GpSite> target,
                                       double phi) {
  if (obs.size() < 2) throw DataError("simple_krige_covariate: need >= 2 observed sites");
  const double mean = obs_values.mean();
  const Eigen::VectorXd centred = obs_values.array() - mean;
  const KernelSpec k = KernelSpec::iso(phi);
  KrigeResult r = krige(k, obs, centred, target);
  return r.mean.array() + mean;
}

}  // namespace bivrec
