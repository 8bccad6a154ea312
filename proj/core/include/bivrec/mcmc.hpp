#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bivrec/coreg.hpp"
#include "bivrec/design.hpp"
#include "bivrec/gp.hpp"
#include "bivrec/records.hpp"
#include "bivrec/rng.hpp"

namespace bivrec {

// Model family. M0 is the analytic stationary reference (no sampling), M1 a
// pair of univariate fits, M2 the base bivariate model, M3 adds spatially
// varying coregionalisation, M4 adds covariate anisotropy, M5 both.
enum class Variant { M0, M1, M2, M3, M4, M5 };

struct VariantSpec {
  Variant id = Variant::M2;

  bool stationary() const { return id == Variant::M0; }
  bool bivariate() const { return id != Variant::M0 && id != Variant::M1; }
  bool spatially_varying() const { return id == Variant::M3 || id == Variant::M5; }
  bool anisotropic() const { return id == Variant::M4 || id == Variant::M5; }
  const char* name() const;

  static VariantSpec parse(const std::string& s);
};

struct PriorConfig {
  double beta_sd = 10.0;             // N(0, sd^2) per regression coefficient
  double diag_halfnormal_sd = 5.0;   // half-normal scale for constant a11, a22
  double a21_sd = 10.0;              // N(0, sd^2) for constant a21
  double range_shape = 2.0;          // 3/phi ~ IG(shape, scale)
  double range_scale = 300.0;        //   prior mean 300 km
  double range_x_shape = 2.0;        // 3/phi_x ~ IG(shape, scale_x)
  double range_x_scale = 0.0;        //   0 = derive: mean one third of max covariate gap
  double beta_a_sd = 10.0;           // N_q(0, sd^2 I) for field regressions
  double sigma2_a_shape = 0.1;       // sigma^2_a ~ IG(shape, scale)
  double sigma2_a_scale = 0.1;
  double phi_a = 1.0 / 300.0;        // fixed decay of the A(s) fields
};

struct SamplerConfig {
  VariantSpec variant;
  long sweeps = 20000;
  double burn_in_fraction = 1.0 / 3.0;
  int thin_to = 500;
  int n_chains = 2;
  std::uint64_t seed = 1;
  int w_store = 200;                 // archived w draws per chain (down-sampled)
  int adapt_batch = 25;
  double adapt_target = 0.35;
  int threads = 1;
  PriorConfig prior;
};

// Data block the sampler consumes: the record panel plus station geometry,
// with pairwise distances and (for anisotropic variants) the climate
// covariate x(s) = log(s_x), kriged onto stations that lack it.
struct FitData {
  SeriesLayout layout;
  std::vector<StationMeta> stations;
  RecordPanel panel;
  std::vector<GpSite> gp_sites;      // coords in km, covariate filled if aniso
  Eigen::VectorXd log_dist;          // log(1 + dist_coast) per station
  Eigen::VectorXd covariate_x;       // log(s_x) per station (aniso only)
  double max_covariate_gap = 0.0;

  int n_sites() const { return static_cast<int>(stations.size()); }
  int lik_years() const { return layout.n_years - 1; }
  long n_day_slices() const {
    return static_cast<long>(lik_years()) * layout.n_days;
  }
  long n_obs() const { return n_day_slices() * n_sites(); }
};

FitData prepare_fit_data(const RecordPanel& panel,
                         std::vector<StationMeta> stations,
                         bool need_covariate);

// Resolve record marks into binary indicators: ZERO -> 0, ONE -> 1, TIED(r)
// -> Bernoulli(1/r), independently per call.
std::vector<std::uint8_t> sample_tied(std::span<const MarkCode> marks, Rng& rng);

// One Gibbs/Metropolis chain over the data-augmented probit model. Sweep
// order: tied resolution, latent Y, coefficients B, day fields w, the
// coregionalisation, then the decay parameters. Handles bivariate variants
// directly; univariate fits instantiate it with a single signal.
class GibbsSampler {
 public:
  GibbsSampler(const FitData& data, const VariantSpec& variant,
               const PriorConfig& prior, std::vector<Signal> signals, Rng rng);
  ~GibbsSampler();
  GibbsSampler(GibbsSampler&&) noexcept;

  void sweep();
  void set_adapting(bool on);

  // Individual Gibbs blocks in sweep order, exposed so each conditional can
  // be verified in isolation.
  void update_tied();
  void update_y();
  void update_b();
  void update_w();
  void update_coreg();
  void update_ranges();

  // State injection for block-level verification.
  void set_beta_std(const Eigen::MatrixXd& beta);
  void set_coreg_constant(const CoregConstant& a);
  void set_phi(double phi);
  void set_latent_y(const Eigen::MatrixXd& y);

  int n_signals() const;
  int design_dim() const;
  int n_processes() const;  // latent GPs: 2 bivariate, 1 univariate

  const Eigen::MatrixXd& beta_std() const;           // n_sig x k, fitting scale
  Eigen::MatrixXd beta_raw() const;                  // back-transformed
  const Standardizer& standardizer() const;
  const CoregConstant& coreg_constant() const;
  const CoregField& coreg_field() const;
  double phi() const;
  double phi_x() const;
  const Eigen::MatrixXd& w_field(int process) const; // n_sites x n_day_slices
  double mean_w() const;
  const Eigen::MatrixXd& latent_y() const;           // n_obs x n_sig
  std::span<const std::uint8_t> resolved(Signal s) const;
  double mh_acceptance_rate(const std::string& block) const;

  // Geweke joint-distribution testing: draw the parameter block from its
  // priors, or redraw (w, Y, indicators) from the model given the current
  // parameters. Both use the sampler's own likelihood arithmetic.
  void draw_params_from_prior();
  void geweke_data_step();

  Rng& rng();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Thinned archive of one chain.
struct ChainDraws {
  int chain_id = 0;
  std::vector<long> sweep;                 // sweep index per kept draw
  Eigen::MatrixXd values;                  // kept draws x parameters
  std::vector<int> w_draw_rows;            // rows with archived day fields
  std::vector<Eigen::MatrixXd> w0, w1;     // per archived draw, sites x day slices
};

struct PosteriorDraws {
  VariantSpec variant;
  std::vector<std::string> names;
  std::vector<ChainDraws> chains;

  int param_index(const std::string& name) const;
  // Pooled posterior mean of one parameter across chains.
  double posterior_mean(const std::string& name) const;
  // Pooled equal-tail interval (type-7 quantiles) across chains.
  std::pair<double, double> credible_interval(const std::string& name,
                                              double level = 0.90) const;
};

PosteriorDraws run_chain(const FitData& data, const SamplerConfig& config,
                         int chain_id);
PosteriorDraws run_chains(const FitData& data, const SamplerConfig& config);

struct DiagnosticRow {
  std::string param;
  double rhat;
  double ess;
};

// Split-Rhat and autocovariance-summation ESS per parameter.
std::vector<DiagnosticRow> diagnostics(const PosteriorDraws& draws);
double split_rhat(const std::vector<Eigen::VectorXd>& chains);
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

}  // namespace bivrec
