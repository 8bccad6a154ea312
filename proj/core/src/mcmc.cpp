#include "bivrec/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "bivrec/stats.hpp"

namespace bivrec {

const char* VariantSpec::name() const {
  switch (id) {
    case Variant::M0: return "M0";
    case Variant::M1: return "M1";
    case Variant::M2: return "M2";
    case Variant::M3: return "M3";
    case Variant::M4: return "M4";
    case Variant::M5: return "M5";
  }
  return "?";
}

VariantSpec VariantSpec::parse(const std::string& s) {
  for (Variant v : {Variant::M0, Variant::M1, Variant::M2, Variant::M3,
                    Variant::M4, Variant::M5}) {
    VariantSpec spec{v};
    if (s == spec.name()) return spec;
  }
  throw ConfigError("unknown model variant '" + s + "' (expected M0..M5)");
}

FitData prepare_fit_data(const RecordPanel& panel,
                         std::vector<StationMeta> stations,
                         bool need_covariate) {
  if (stations.size() != panel.site_ids.size()) {
    throw DataError("prepare_fit_data: station and panel site counts differ");
  }
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].id != panel.site_ids[i]) {
      throw DataError("prepare_fit_data: station order does not match panel");
    }
    if (stations[i].dist_coast_km < 0.0) {
      throw DataError("negative coast distance at station " + stations[i].id);
    }
  }
  FitData fd;
  fd.layout = panel.layout;
  fd.stations = std::move(stations);
  fd.panel = panel;
  const int n = fd.n_sites();
  fd.gp_sites.resize(n);
  fd.log_dist.resize(n);
  for (int i = 0; i < n; ++i) {
    fd.gp_sites[i] = GpSite{fd.stations[i].x_km, fd.stations[i].y_km, 0.0};
    fd.log_dist[i] = std::log1p(fd.stations[i].dist_coast_km);
  }
  if (need_covariate) {
    std::vector<GpSite> have;
    std::vector<int> have_idx, miss_idx;
    Eigen::VectorXd have_vals;
    for (int i = 0; i < n; ++i) {
      if (fd.stations[i].has_sx()) {
        if (!(fd.stations[i].sx > 0.0)) {
          throw DataError("station " + fd.stations[i].id + " has non-positive sx");
        }
        have.push_back(fd.gp_sites[i]);
        have_idx.push_back(i);
      } else {
        miss_idx.push_back(i);
      }
    }
    if (have.empty()) {
      throw ConfigError("anisotropic variant requires sx at one station or more");
    }
    have_vals.resize(have.size());
    for (std::size_t j = 0; j < have_idx.size(); ++j) {
      have_vals[j] = std::log(fd.stations[have_idx[j]].sx);
    }
    fd.covariate_x.resize(n);
    for (std::size_t j = 0; j < have_idx.size(); ++j) {
      fd.covariate_x[have_idx[j]] = have_vals[j];
    }
    if (!miss_idx.empty()) {
      if (have.size() < 2) {
        throw ConfigError("cannot krige sx onto stations: fewer than two sources");
      }
      std::vector<GpSite> targets;
      for (int i : miss_idx) targets.push_back(fd.gp_sites[i]);
      // No fit exists yet; the default interpolation decay is 1/300.
      Eigen::VectorXd filled =
          simple_krige_covariate(have_vals, have, targets, 1.0 / 300.0);
      for (std::size_t j = 0; j < miss_idx.size(); ++j) {
        fd.covariate_x[miss_idx[j]] = filled[j];
      }
    }
    double gap = 0.0;
    for (int i = 0; i < n; ++i) {
      fd.gp_sites[i].covariate = fd.covariate_x[i];
      for (int j = 0; j < i; ++j) {
        gap = std::max(gap, std::abs(fd.covariate_x[i] - fd.covariate_x[j]));
      }
    }
    fd.max_covariate_gap = gap;
  }
  return fd;
}

std::vector<std::uint8_t> sample_tied(std::span<const MarkCode> marks, Rng& rng) {
  std::vector<std::uint8_t> out(marks.size());
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const MarkCode m = marks[i];
    if (m <= 1) {
      out[i] = static_cast<std::uint8_t>(m);
    } else {
      out[i] = rng.bernoulli(1.0 / static_cast<double>(m)) ? 1 : 0;
    }
  }
  return out;
}

namespace {

double col_value(DesignCol c, double lag_max, double lag_min, double log_dist,
                 double trend) {
  switch (c) {
    case DesignCol::Intercept: return 1.0;
    case DesignCol::LagMax: return lag_max;
    case DesignCol::LagMin: return lag_min;
    case DesignCol::LogDist: return log_dist;
    case DesignCol::Trend: return trend;
    case DesignCol::TrendLagMax: return trend * lag_max;
    case DesignCol::TrendLagMin: return trend * lag_min;
    case DesignCol::TrendLogDist: return trend * log_dist;
  }
  return 0.0;
}

struct AdaptState {
  double log_sd = 0.0;
  long batch_accept = 0;
  long batch_count = 0;
  long batches = 0;
  long frozen_accept = 0;
  long frozen_count = 0;

  double sd() const { return std::exp(log_sd); }
  void record(bool accepted, bool adapting, int batch, double target) {
    if (adapting) {
      batch_accept += accepted;
      if (++batch_count == batch) {
        ++batches;
        const double rate = static_cast<double>(batch_accept) / batch;
        log_sd += (rate - target) / std::sqrt(static_cast<double>(batches));
        batch_accept = 0;
        batch_count = 0;
      }
    } else {
      frozen_accept += accepted;
      ++frozen_count;
    }
  }
  double frozen_rate() const {
    return frozen_count > 0
               ? static_cast<double>(frozen_accept) / frozen_count
               : std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace

struct GibbsSampler::Impl {
  const FitData* data;
  VariantSpec variant;
  PriorConfig prior;
  std::vector<Signal> signals;
  Rng rng;

  int n_sig = 0, n_proc = 0, k = 0;
  int n = 0, n_years = 0, n_days = 0;
  long n_slices = 0, n_obs = 0;
  std::vector<DesignCol> cols;
  Standardizer std_;

  Eigen::VectorXd trend;     // probit(1/t), t = tau+1, tau = 1..T-1
  Eigen::VectorXd log_dist;

  // Marks over tau in [1, T-1], d in [0, n_days], site-major innermost.
  std::array<std::vector<MarkCode>, 2> marks;
  std::array<std::vector<std::pair<long, MarkCode>>, 2> tied;
  std::array<std::vector<std::uint8_t>, 2> resolved;

  std::vector<long> resp_mcell;  // obs -> response mark cell
  std::vector<long> lag_mcell;   // obs -> previous-day mark cell

  Eigen::MatrixXd X;             // standardized design, n_obs x k
  std::array<int, 2> lag_col{-1, -1};
  std::array<int, 2> tlag_col{-1, -1};
  // The coefficient prior N(0, beta_sd^2 I) lives on the raw covariate
  // scale; on the fitting scale it becomes N(0, beta_sd^2 (G^T G)^{-1})
  // with G the back-transform map, so the prior precision is G^T G / sd^2.
  Eigen::MatrixXd beta_prior_prec;

  Eigen::MatrixXd beta;          // n_sig x k, fitting scale
  Eigen::MatrixXd Y, mu, v;      // n_obs x n_sig
  std::array<Eigen::MatrixXd, 2> w;        // n x n_slices per process
  std::array<Eigen::VectorXd, 2> wobs;     // per-obs view of w
  Eigen::VectorXd d11, d21, d22;           // site-indexed coreg entries

  bool sv = false;
  CoregConstant cc;
  CoregField cf;
  Eigen::MatrixXd Zfield;        // n x 2: (1, log(1+dist))
  Eigen::MatrixXd Rainv;         // field correlation inverse (fixed phi_a)
  Eigen::MatrixXd Rachol;        // lower factor of the field correlation
  Eigen::Matrix2d ZRZ;           // Z' Rainv Z
  Eigen::MatrixXd ZR;            // Z' Rainv

  double phi = 0.01, phi_x = 0.0;
  double range_x_scale_eff = 0.0;
  Eigen::MatrixXd C, Cinv;
  Eigen::LLT<Eigen::MatrixXd> cllt;
  double clogdet = 0.0;

  bool adapting = true;
  int adapt_batch = 25;
  double adapt_target = 0.35;
  AdaptState adapt_phi, adapt_phi_x;
  AdaptState adapt_scale_aw, adapt_scale_global;
  std::array<std::vector<AdaptState>, 3> adapt_field;

  // ---- indexing ----
  long mcell(int tau, int d, int i) const {
    return (static_cast<long>(tau - 1) * (n_days + 1) + d) * n + i;
  }
  long slice_of(int tau, int d) const {
    return static_cast<long>(tau - 1) * n_days + (d - 1);
  }
  double site_a11(int i) const { return sv ? cf.a11(i) : cc.a11; }
  double site_a22(int i) const { return sv ? cf.a22(i) : cc.a22; }
  double site_a21(int i) const { return sv ? cf.a21[i] : cc.a21; }

  bool bivariate() const { return n_sig == 2; }

  // ---- construction ----
  Impl(const FitData& fd, const VariantSpec& var, const PriorConfig& pr,
       std::vector<Signal> sigs, Rng r)
      : data(&fd), variant(var), prior(pr), signals(std::move(sigs)), rng(r) {
    n_sig = static_cast<int>(signals.size());
    n_proc = n_sig;
    n = fd.n_sites();
    n_years = fd.layout.n_years;
    n_days = fd.layout.n_days;
    n_slices = fd.n_day_slices();
    n_obs = fd.n_obs();
    sv = variant.spatially_varying() && bivariate();

    cols = bivariate() ? bivariate_columns() : univariate_columns(signals[0]);
    k = static_cast<int>(cols.size());

    trend.resize(std::max(0, n_years - 1));
    for (int tau = 1; tau < n_years; ++tau) {
      trend[tau - 1] = probit(1.0 / (tau + 1));
    }
    log_dist = fd.log_dist;

    copy_marks();
    build_obs_maps();
    init_design();
    init_state();
    init_kernel();
  }

  void copy_marks() {
    for (int s = 0; s < n_sig; ++s) {
      const Signal sig = signals[s];
      auto& m = marks[s];
      m.resize(static_cast<long>(std::max(0, n_years - 1)) * (n_days + 1) * n);
      tied[s].clear();
      for (int tau = 1; tau < n_years; ++tau) {
        for (int d = 0; d <= n_days; ++d) {
          for (int i = 0; i < n; ++i) {
            const MarkCode code = data->panel.mark(sig, i, tau, d);
            m[mcell(tau, d, i)] = code;
            if (code >= 2) tied[s].push_back({mcell(tau, d, i), code});
          }
        }
      }
      resolved[s].assign(m.size(), 0);
      for (std::size_t c = 0; c < m.size(); ++c) {
        resolved[s][c] = m[c] == kMarkOne ? 1 : 0;
      }
    }
  }

  void build_obs_maps() {
    resp_mcell.resize(n_obs);
    lag_mcell.resize(n_obs);
    for (int tau = 1; tau < n_years; ++tau) {
      for (int d = 1; d <= n_days; ++d) {
        const long sl = slice_of(tau, d);
        for (int i = 0; i < n; ++i) {
          resp_mcell[sl * n + i] = mcell(tau, d, i);
          lag_mcell[sl * n + i] = mcell(tau, d - 1, i);
        }
      }
    }
  }

  double expected_mark(int s, long cell) const {
    const MarkCode code = marks[s][cell];
    if (code <= 1) return static_cast<double>(code);
    return 1.0 / static_cast<double>(code);
  }

  void init_design() {
    Eigen::MatrixXd raw(n_obs, k);
    for (int tau = 1; tau < n_years; ++tau) {
      for (int d = 1; d <= n_days; ++d) {
        const long sl = slice_of(tau, d);
        for (int i = 0; i < n; ++i) {
          const long o = sl * n + i;
          const long lc = lag_mcell[o];
          // Expected lag values fix the standardizer deterministically; the
          // fitted scale never depends on any particular tie resolution.
          const double lm = n_sig == 2 || signals[0] == Signal::Max
                                ? expected_mark(0, lc)
                                : 0.0;
          const double ln = bivariate() ? expected_mark(1, lc)
                            : signals[0] == Signal::Min ? expected_mark(0, lc)
                                                        : 0.0;
          for (int j = 0; j < k; ++j) {
            raw(o, j) = col_value(cols[j], lm, ln, log_dist[i], trend[tau - 1]);
          }
        }
      }
    }
    std::vector<bool> indicator_like(k);
    for (int j = 0; j < k; ++j) indicator_like[j] = is_indicator_column(cols[j]);
    std_ = n_obs > 0 ? Standardizer::fit(raw, indicator_like, /*strict=*/false)
                     : Standardizer::identity(k);
    X = std_.apply(raw);
    for (int j = 0; j < k; ++j) {
      switch (cols[j]) {
        case DesignCol::LagMax: lag_col[0] = j; break;
        case DesignCol::LagMin: lag_col[1] = j; break;
        case DesignCol::TrendLagMax: tlag_col[0] = j; break;
        case DesignCol::TrendLagMin: tlag_col[1] = j; break;
        default: break;
      }
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
    g(0, 0) = 1.0;
    for (int j = 1; j < k; ++j) {
      g(j, j) = 1.0 / std_.scale()[j];
      g(0, j) = -std_.mean()[j] / std_.scale()[j];
    }
    beta_prior_prec =
        g.transpose() * g / (prior.beta_sd * prior.beta_sd);
  }

  void init_state() {
    beta = Eigen::MatrixXd::Zero(n_sig, k);
    Y = Eigen::MatrixXd::Zero(n_obs, n_sig);
    mu = Eigen::MatrixXd::Zero(n_obs, n_sig);
    v = Eigen::MatrixXd::Zero(n_obs, n_sig);
    for (int p = 0; p < n_proc; ++p) {
      w[p] = Eigen::MatrixXd::Zero(n, n_slices);
      wobs[p] = Eigen::VectorXd::Zero(n_obs);
    }
    d11 = Eigen::VectorXd::Ones(n);
    d21 = Eigen::VectorXd::Zero(n);
    d22 = Eigen::VectorXd::Ones(n);

    // Weakly dispersed start: neutral values plus a per-chain jitter.
    for (int s = 0; s < n_sig; ++s) {
      for (int j = 0; j < k; ++j) beta(s, j) = rng.normal(0.0, 0.3);
    }
    cc.a11 = std::abs(rng.normal(1.0, 0.3));
    cc.a22 = std::abs(rng.normal(1.0, 0.3));
    cc.a21 = rng.normal(0.0, 0.3);
    if (cc.a11 <= 0.0) cc.a11 = 1.0;
    if (cc.a22 <= 0.0) cc.a22 = 1.0;

    Zfield.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      Zfield(i, 0) = 1.0;
      Zfield(i, 1) = log_dist[i];
    }
    if (sv) {
      cf.phi_a = prior.phi_a;
      KernelSpec ka = KernelSpec::iso(cf.phi_a);
      Eigen::MatrixXd Ra = cov_matrix(ka, data->gp_sites);
      CholeskyResult cr = chol_with_jitter(Ra);
      Rachol = cr.llt.matrixL();
      Rainv = cr.llt.solve(Eigen::MatrixXd::Identity(n, n));
      ZRZ = Zfield.transpose() * Rainv * Zfield;
      ZR = Zfield.transpose() * Rainv;
      cf.log_a11 = Eigen::VectorXd::Zero(n);
      cf.log_a22 = Eigen::VectorXd::Zero(n);
      cf.a21 = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) {
        cf.log_a11[i] = rng.normal(0.0, 0.1);
        cf.log_a22[i] = rng.normal(0.0, 0.1);
        cf.a21[i] = rng.normal(0.0, 0.1);
      }
      cf.beta_a11.setZero();
      cf.beta_a22.setZero();
      cf.beta_a21.setZero();
      cf.sigma2_a11 = cf.sigma2_a22 = cf.sigma2_a21 = 1.0;
      for (auto& af : adapt_field) af.assign(n, AdaptState{});
    }
    refresh_coreg_vectors();
  }

  void init_kernel() {
    phi = (3.0 / prior.range_scale) * std::exp(rng.normal(0.0, 0.1));
    if (variant.anisotropic()) {
      range_x_scale_eff = prior.range_x_scale > 0.0
                              ? prior.range_x_scale
                              : data->max_covariate_gap / 3.0;
      if (!(range_x_scale_eff > 0.0)) {
        throw ConfigError("anisotropic variant needs a positive covariate range scale");
      }
      phi_x = (3.0 / range_x_scale_eff) * std::exp(rng.normal(0.0, 0.1));
    }
    rebuild_kernel();
  }

  KernelSpec kernel() const {
    return variant.anisotropic() ? KernelSpec::anisotropic(phi, phi_x)
                                 : KernelSpec::iso(phi);
  }

  void rebuild_kernel() {
    if (n == 0) return;
    C = cov_matrix(kernel(), data->gp_sites);
    CholeskyResult cr = chol_with_jitter(C);
    cllt = cr.llt;
    clogdet = cr.log_det();
    Cinv = cllt.solve(Eigen::MatrixXd::Identity(n, n));
  }

  void refresh_coreg_vectors() {
    if (sv) {
      for (int i = 0; i < n; ++i) {
        d11[i] = cf.a11(i);
        d22[i] = cf.a22(i);
        d21[i] = cf.a21[i];
      }
    } else {
      d11.setConstant(cc.a11);
      d22.setConstant(cc.a22);
      d21.setConstant(cc.a21);
    }
  }

  // ---- per-sweep state refreshers ----
  void resolve_ties() {
    for (int s = 0; s < n_sig; ++s) {
      for (const auto& [cell, r] : tied[s]) {
        resolved[s][cell] = rng.bernoulli(1.0 / static_cast<double>(r)) ? 1 : 0;
      }
    }
  }

  void rebuild_lag_columns() {
    if (n_obs == 0) return;
    const auto set_cols = [&](int sig_slot, int value_slot) {
      const int jc = lag_col[sig_slot];
      const int jt = tlag_col[sig_slot];
      if (jc < 0 && jt < 0) return;
      const double mc = jc >= 0 ? std_.mean()[jc] : 0.0;
      const double sc = jc >= 0 ? std_.scale()[jc] : 1.0;
      const double mt = jt >= 0 ? std_.mean()[jt] : 0.0;
      const double st = jt >= 0 ? std_.scale()[jt] : 1.0;
      for (int tau = 1; tau < n_years; ++tau) {
        const double tr = trend[tau - 1];
        for (int d = 1; d <= n_days; ++d) {
          const long sl = slice_of(tau, d);
          for (int i = 0; i < n; ++i) {
            const long o = sl * n + i;
            const double lag = resolved[value_slot][lag_mcell[o]];
            if (jc >= 0) X(o, jc) = (lag - mc) / sc;
            if (jt >= 0) X(o, jt) = (tr * lag - mt) / st;
          }
        }
      }
    };
    if (bivariate()) {
      set_cols(0, 0);
      set_cols(1, 1);
    } else {
      set_cols(signals[0] == Signal::Max ? 0 : 1, 0);
    }
  }

  void refresh_mu() { if (n_obs > 0) mu.noalias() = X * beta.transpose(); }

  void refresh_v() {
    for (long sl = 0; sl < n_slices; ++sl) {
      for (int i = 0; i < n; ++i) {
        const long o = sl * n + i;
        const double w1 = w[0](i, sl);
        wobs[0][o] = w1;
        if (bivariate()) {
          const double w2 = w[1](i, sl);
          wobs[1][o] = w2;
          v(o, 0) = d11[i] * w1;
          v(o, 1) = d21[i] * w1 + d22[i] * w2;
        } else {
          v(o, 0) = d11[i] * w1;
        }
      }
    }
  }

  // ---- Gibbs updates ----
  void update_y() {
    for (int s = 0; s < n_sig; ++s) {
      for (long o = 0; o < n_obs; ++o) {
        const double eta = mu(o, s) + v(o, s);
        if (!std::isfinite(eta)) {
          throw NumericalError("update_y: non-finite linear predictor");
        }
        Y(o, s) = rng.trunc_normal_signed(eta, resolved[s][resp_mcell[o]] != 0);
      }
    }
  }

  void update_b() {
    Eigen::MatrixXd P = beta_prior_prec;
    if (n_obs > 0) P.noalias() += X.transpose() * X;
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("update_b: singular posterior precision");
    }
    for (int s = 0; s < n_sig; ++s) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
      if (n_obs > 0) rhs.noalias() = X.transpose() * (Y.col(s) - v.col(s));
      Eigen::VectorXd z(k);
      for (int j = 0; j < k; ++j) z[j] = rng.normal();
      beta.row(s) =
          (llt.solve(rhs) + llt.matrixU().solve(z)).transpose();
    }
    refresh_mu();
  }

  void update_w() {
    if (n_slices == 0) return;
    if (bivariate()) {
      const int m2 = 2 * n;
      Eigen::MatrixXd Q(m2, m2);
      Q.topLeftCorner(n, n) = Cinv;
      Q.topLeftCorner(n, n).diagonal() +=
          (d11.array().square() + d21.array().square()).matrix();
      Q.topRightCorner(n, n).setZero();
      Q.topRightCorner(n, n).diagonal() = d21.cwiseProduct(d22);
      Q.bottomLeftCorner(n, n) = Q.topRightCorner(n, n);
      Q.bottomRightCorner(n, n) = Cinv;
      Q.bottomRightCorner(n, n).diagonal() += d22.array().square().matrix();
      Eigen::LLT<Eigen::MatrixXd> lltQ(Q);
      if (lltQ.info() != Eigen::Success) {
        throw NumericalError("update_w: day-field precision not PD");
      }
      Eigen::VectorXd b(m2), z(m2);
      for (long sl = 0; sl < n_slices; ++sl) {
        for (int i = 0; i < n; ++i) {
          const long o = sl * n + i;
          const double r0 = Y(o, 0) - mu(o, 0);
          const double r1 = Y(o, 1) - mu(o, 1);
          b[i] = d11[i] * r0 + d21[i] * r1;
          b[n + i] = d22[i] * r1;
        }
        for (int j = 0; j < m2; ++j) z[j] = rng.normal();
        lltQ.solveInPlace(b);
        lltQ.matrixU().solveInPlace(z);
        b += z;
        w[0].col(sl) = b.head(n);
        w[1].col(sl) = b.tail(n);
      }
    } else {
      Eigen::MatrixXd Q = Cinv;
      Q.diagonal() += d11.array().square().matrix();
      Eigen::LLT<Eigen::MatrixXd> lltQ(Q);
      if (lltQ.info() != Eigen::Success) {
        throw NumericalError("update_w: day-field precision not PD");
      }
      Eigen::VectorXd b(n), z(n);
      for (long sl = 0; sl < n_slices; ++sl) {
        for (int i = 0; i < n; ++i) {
          const long o = sl * n + i;
          b[i] = d11[i] * (Y(o, 0) - mu(o, 0));
        }
        for (int j = 0; j < n; ++j) z[j] = rng.normal();
        lltQ.solveInPlace(b);
        lltQ.matrixU().solveInPlace(z);
        w[0].col(sl) = b + z;
      }
    }
    refresh_v();
  }

  void update_coreg() {
    if (sv) {
      update_coreg_field();
    } else {
      update_coreg_constant();
    }
    refresh_coreg_vectors();
    refresh_v();
  }

  void update_coreg_constant() {
    const double hp = 1.0 / (prior.diag_halfnormal_sd * prior.diag_halfnormal_sd);
    {
      const double prec = wobs[0].squaredNorm() + hp;
      const double lin = n_obs > 0 ? wobs[0].dot(Y.col(0) - mu.col(0)) : 0.0;
      cc.a11 = rng.trunc_normal_positive(lin / prec, std::sqrt(1.0 / prec));
    }
    if (!bivariate()) return;
    {
      const double prec = wobs[1].squaredNorm() + hp;
      double lin = 0.0;
      if (n_obs > 0) {
        lin = wobs[1].dot(Y.col(1) - mu.col(1) - cc.a21 * wobs[0]);
      }
      cc.a22 = rng.trunc_normal_positive(lin / prec, std::sqrt(1.0 / prec));
    }
    {
      const double prec =
          wobs[0].squaredNorm() + 1.0 / (prior.a21_sd * prior.a21_sd);
      double lin = 0.0;
      if (n_obs > 0) {
        lin = wobs[0].dot(Y.col(1) - mu.col(1) - cc.a22 * wobs[1]);
      }
      cc.a21 = rng.normal(lin / prec, std::sqrt(1.0 / prec));
    }
  }

  // Conditional-normal prior of field entry i given the rest under the GP
  // N(mean_vec, sigma2 * Ra).
  std::pair<double, double> field_conditional(const Eigen::VectorXd& f,
                                              const Eigen::VectorXd& mean_vec,
                                              double sigma2, int i) const {
    const double pii = Rainv(i, i);
    const double dot = Rainv.row(i).dot(f - mean_vec);
    const double cond_mean = mean_vec[i] - (dot - pii * (f[i] - mean_vec[i])) / pii;
    const double cond_prec = pii / sigma2;
    return {cond_mean, cond_prec};
  }

  void mh_field_update(Eigen::VectorXd& field, bool log_scale,
                       const Eigen::VectorXd& mean_vec, double sigma2,
                       int process, const Eigen::VectorXd& resid_base,
                       const Eigen::VectorXd& other_term,
                       std::vector<AdaptState>& adapt) {
    // Likelihood per site: resid = a(s) * w_proc + eps, Gaussian in a(s).
    for (int i = 0; i < n; ++i) {
      double s_ww = 0.0, s_wr = 0.0;
      for (long sl = 0; sl < n_slices; ++sl) {
        const long o = sl * n + i;
        const double wv = w[process](i, sl);
        s_ww += wv * wv;
        s_wr += wv * (resid_base[o] - other_term[o]);
      }
      const double cur_state = field[i];
      const double prop_state = cur_state + adapt[i].sd() * rng.normal();
      const double cur_a = log_scale ? std::exp(cur_state) : cur_state;
      const double prop_a = log_scale ? std::exp(prop_state) : prop_state;
      double dlik = 0.0;
      if (s_ww > 0.0) {
        const double m = s_wr / s_ww;
        dlik = -0.5 * s_ww * ((prop_a - m) * (prop_a - m) - (cur_a - m) * (cur_a - m));
      }
      const auto [cm, cp] = field_conditional(field, mean_vec, sigma2, i);
      const double dpri =
          -0.5 * cp * ((prop_state - cm) * (prop_state - cm) -
                       (cur_state - cm) * (cur_state - cm));
      const bool accept = std::log(rng.uniform()) <= dlik + dpri;
      if (accept) field[i] = prop_state;
      adapt[i].record(accept, adapting, adapt_batch, adapt_target);
    }
  }

  void update_field_hyper(const Eigen::VectorXd& f, Eigen::Vector2d& beta_a,
                          double& sigma2) {
    const double prior_prec = 1.0 / (prior.beta_a_sd * prior.beta_a_sd);
    Eigen::Matrix2d P = ZRZ / sigma2;
    P.diagonal().array() += prior_prec;
    const Eigen::Vector2d rhs = ZR * f / sigma2;
    Eigen::LLT<Eigen::Matrix2d> llt(P);
    Eigen::Vector2d z{rng.normal(), rng.normal()};
    beta_a = llt.solve(rhs) + llt.matrixU().solve(z);
    const Eigen::VectorXd resid = f - Zfield * beta_a;
    const double ss = resid.dot(Rainv * resid);
    sigma2 = rng.inverse_gamma(prior.sigma2_a_shape + 0.5 * n,
                               prior.sigma2_a_scale + 0.5 * ss);
  }

  void update_coreg_field() {
    Eigen::VectorXd r0 = Eigen::VectorXd::Zero(n_obs);
    Eigen::VectorXd r1 = Eigen::VectorXd::Zero(n_obs);
    if (n_obs > 0) {
      r0 = Y.col(0) - mu.col(0);
      r1 = Y.col(1) - mu.col(1);
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n_obs);

    // a11(s): log-scale state against the max-signal residual.
    mh_field_update(cf.log_a11, true, Zfield * cf.beta_a11, cf.sigma2_a11, 0,
                    r0, zero, adapt_field[0]);
    update_field_hyper(cf.log_a11, cf.beta_a11, cf.sigma2_a11);

    // a22(s): log scale, min residual net of a21(s) w1.
    Eigen::VectorXd a21w1(n_obs);
    for (long sl = 0; sl < n_slices; ++sl) {
      for (int i = 0; i < n; ++i) {
        a21w1[sl * n + i] = cf.a21[i] * w[0](i, sl);
      }
    }
    mh_field_update(cf.log_a22, true, Zfield * cf.beta_a22, cf.sigma2_a22, 1,
                    r1, a21w1, adapt_field[1]);
    update_field_hyper(cf.log_a22, cf.beta_a22, cf.sigma2_a22);

    // a21(s): raw scale against w1, min residual net of a22(s) w2.
    Eigen::VectorXd a22w2(n_obs);
    for (long sl = 0; sl < n_slices; ++sl) {
      for (int i = 0; i < n; ++i) {
        a22w2[sl * n + i] = cf.a22(i) * w[1](i, sl);
      }
    }
    mh_field_update(cf.a21, false, Zfield * cf.beta_a21, cf.sigma2_a21, 0,
                    r1, a22w2, adapt_field[2]);
    update_field_hyper(cf.a21, cf.beta_a21, cf.sigma2_a21);
  }

  double gp_loglik(const Eigen::LLT<Eigen::MatrixXd>& llt, double logdet) const {
    double quad = 0.0;
    for (int p = 0; p < n_proc; ++p) {
      if (n_slices == 0) continue;
      quad += llt.matrixL().solve(w[p]).squaredNorm();
    }
    const double n_fields = static_cast<double>(n_proc) * n_slices;
    return -0.5 * (n_fields * logdet + quad);
  }

  double w_prior_quad() const {
    double quad = 0.0;
    for (int p = 0; p < n_proc; ++p) {
      if (n_slices == 0) continue;
      quad += cllt.matrixL().solve(w[p]).squaredNorm();
    }
    return quad;
  }

  // Prior log-density change when every coregionalisation entry is scaled by
  // c (log-scale fields translate by log c, raw entries multiply).
  double coreg_prior_delta(double c) const {
    const double theta = std::log(c);
    if (!sv) {
      const double h2 = prior.diag_halfnormal_sd * prior.diag_halfnormal_sd;
      double r = cc.a11 * cc.a11 / h2;
      if (bivariate()) {
        r += cc.a22 * cc.a22 / h2 +
             cc.a21 * cc.a21 / (prior.a21_sd * prior.a21_sd);
      }
      return -0.5 * (c * c - 1.0) * r;
    }
    double delta = 0.0;
    auto shift_field = [&](const Eigen::VectorXd& f, const Eigen::Vector2d& b,
                           double sigma2) {
      const Eigen::VectorXd dev = f - Zfield * b;
      const Eigen::VectorXd pdev = Rainv * dev / sigma2;
      const double one_p_one = Rainv.sum() / sigma2;
      delta += -theta * pdev.sum() - 0.5 * theta * theta * one_p_one;
    };
    shift_field(cf.log_a11, cf.beta_a11, cf.sigma2_a11);
    shift_field(cf.log_a22, cf.beta_a22, cf.sigma2_a22);
    {
      const Eigen::VectorXd mu_a = Zfield * cf.beta_a21;
      const Eigen::VectorXd dev0 = cf.a21 - mu_a;
      const Eigen::VectorXd dev1 = c * cf.a21 - mu_a;
      delta += -0.5 * (dev1.dot(Rainv * dev1) - dev0.dot(Rainv * dev0)) /
               cf.sigma2_a21;
    }
    return delta;
  }

  // Jacobian exponent of the coregionalisation block under scaling: raw
  // entries contribute one power of c each, log-scale states none.
  double coreg_scale_dim() const {
    if (!sv) return bivariate() ? 3.0 : 1.0;
    return static_cast<double>(n);  // the raw a21 field
  }

  void apply_coreg_scale(double c) {
    const double theta = std::log(c);
    if (!sv) {
      cc.a11 *= c;
      cc.a21 *= c;
      cc.a22 *= c;
    } else {
      cf.log_a11.array() += theta;
      cf.log_a22.array() += theta;
      cf.a21 *= c;
    }
    refresh_coreg_vectors();
  }

  // Group move along (A, w) -> (cA, w/c): the likelihood term is exactly
  // invariant, so the ridge between field amplitude and coregionalisation
  // scale is traversed directly.
  void scale_move_aw() {
    if (n_slices == 0) return;
    const double theta = adapt_scale_aw.sd() * rng.normal();
    const double c = std::exp(theta);
    const double q = w_prior_quad();
    const double n_w = static_cast<double>(n_proc) * n * n_slices;
    const double log_accept = coreg_prior_delta(c) -
                              0.5 * (1.0 / (c * c) - 1.0) * q +
                              (coreg_scale_dim() - n_w) * theta;
    const bool accept = std::log(rng.uniform()) <= log_accept;
    if (accept) {
      apply_coreg_scale(c);
      for (int p = 0; p < n_proc; ++p) w[p] /= c;
      refresh_v();
    }
    adapt_scale_aw.record(accept, adapting, adapt_batch, adapt_target);
  }

  // Exact translation moves along the likelihood-invariant orbits trading a
  // regression coefficient against the day fields: for a min-signal column,
  // beta_min[j] += delta with w2 -= delta u / a22(s); for a max-signal
  // column, beta_max[j] += delta with w1 -= delta u / a11(s) and
  // w2 += delta u a21(s)/(a11(s) a22(s)), which keeps both linear predictors
  // fixed. The orbit density is Gaussian in delta, so each move is a
  // conjugate draw. These directions carry the spatial-confounding ridge
  // between fixed effects and field averages.
  void confound_move_column(int sig, int j) {
    if (n_slices == 0) return;
    if (d11.minCoeff() < 1e-8 || (bivariate() && d22.minCoeff() < 1e-8)) {
      return;  // degenerate coregionalisation; skip the orbit this sweep
    }
    // per-obs shift pattern of each process for a unit delta
    // process shifts: w1 += delta * h1(o), w2 += delta * h2(o)
    const bool min_col = bivariate() ? sig == 1 : !bivariate();
    double quad = beta_prior_prec(j, j);
    double lin = beta_prior_prec.row(j).dot(beta.row(sig));
    Eigen::VectorXd h1(n), h2(n);
    Eigen::VectorXd tmp(n);
    for (long sl = 0; sl < n_slices; ++sl) {
      for (int i = 0; i < n; ++i) {
        const double u = X(sl * n + i, j);
        if (!bivariate()) {
          h1[i] = -u / d11[i];
        } else if (min_col) {
          h1[i] = 0.0;
          h2[i] = -u / d22[i];
        } else {
          h1[i] = -u / d11[i];
          h2[i] = u * d21[i] / (d11[i] * d22[i]);
        }
      }
      tmp.noalias() = Cinv * h1;
      if (!bivariate() || !min_col) {
        quad += h1.dot(tmp);
        lin += w[0].col(sl).dot(tmp);
      }
      if (bivariate()) {
        tmp.noalias() = Cinv * h2;
        quad += h2.dot(tmp);
        lin += w[1].col(sl).dot(tmp);
      }
    }
    // target exp(-(quad delta^2)/2 - lin delta): delta ~ N(-lin/quad, 1/quad)
    const double delta = -lin / quad + rng.normal() / std::sqrt(quad);
    beta(sig, j) += delta;
    for (long sl = 0; sl < n_slices; ++sl) {
      for (int i = 0; i < n; ++i) {
        const double u = X(sl * n + i, j);
        if (!bivariate()) {
          w[0](i, sl) -= delta * u / d11[i];
        } else if (min_col) {
          w[1](i, sl) -= delta * u / d22[i];
        } else {
          w[0](i, sl) -= delta * u / d11[i];
          w[1](i, sl) += delta * u * d21[i] / (d11[i] * d22[i]);
        }
      }
    }
  }

  void confound_moves() {
    if (n_slices == 0) return;
    for (int s = 0; s < n_sig; ++s) {
      for (int j = 0; j < k; ++j) confound_move_column(s, j);
    }
    refresh_mu();
    refresh_v();
  }

  // Group move along (beta, A, Y) -> (c beta, c A, c Y) with w fixed: the
  // probit error term epsilon = Y - mu - v scales by c while the indicator
  // constraints only see the unchanged signs of Y.
  void scale_move_global() {
    if (n_obs == 0) return;
    const double theta = adapt_scale_global.sd() * rng.normal();
    const double c = std::exp(theta);
    const double eps2 = (Y - mu - v).squaredNorm();
    double beta2 = 0.0;
    for (int s = 0; s < n_sig; ++s) {
      beta2 += (beta.row(s) * beta_prior_prec * beta.row(s).transpose()).value();
    }
    const double dim = static_cast<double>(n_obs) * n_sig +
                       static_cast<double>(k) * n_sig + coreg_scale_dim();
    const double log_accept = -0.5 * (c * c - 1.0) * (eps2 + beta2) +
                              coreg_prior_delta(c) + dim * theta;
    const bool accept = std::log(rng.uniform()) <= log_accept;
    if (accept) {
      beta *= c;
      Y *= c;
      apply_coreg_scale(c);
      refresh_mu();
      refresh_v();
    }
    adapt_scale_global.record(accept, adapting, adapt_batch, adapt_target);
  }

  void update_ranges() {
    if (n == 0) return;
    // Spatial decay: random walk on log phi; 3/phi ~ IG(shape, scale) is a
    // Gamma(shape, scale/3) on phi, hence log target shape*z - rate*e^z.
    mh_decay(phi, adapt_phi, prior.range_shape, prior.range_scale / 3.0, false);
    if (variant.anisotropic()) {
      mh_decay(phi_x, adapt_phi_x, prior.range_x_shape,
               range_x_scale_eff / 3.0, true);
    }
  }

  void mh_decay(double& value, AdaptState& adapt, double shape, double rate,
                bool is_covariate_decay) {
    const double z_cur = std::log(value);
    const double z_prop = z_cur + adapt.sd() * rng.normal();
    const double prop = std::exp(z_prop);

    KernelSpec prop_kernel = kernel();
    if (is_covariate_decay) {
      prop_kernel.phi_x = prop;
    } else {
      prop_kernel.phi = prop;
    }
    Eigen::MatrixXd Cp = cov_matrix(prop_kernel, data->gp_sites);
    CholeskyResult cr = chol_with_jitter(Cp);
    const double logdet_prop = cr.log_det();

    const double cur_target =
        shape * z_cur - rate * value + gp_loglik(cllt, clogdet);
    const double prop_target =
        shape * z_prop - rate * prop + gp_loglik(cr.llt, logdet_prop);
    const bool accept = std::log(rng.uniform()) <= prop_target - cur_target;
    if (accept) {
      value = prop;
      C = std::move(Cp);
      cllt = cr.llt;
      clogdet = logdet_prop;
      Cinv = cllt.solve(Eigen::MatrixXd::Identity(n, n));
    }
    adapt.record(accept, adapting, adapt_batch, adapt_target);
  }

  void update_tied() {
    resolve_ties();
    rebuild_lag_columns();
    refresh_mu();
    refresh_v();
  }

  void sweep() {
    update_tied();
    update_y();
    update_b();
    update_w();
    confound_moves();
    update_coreg();
    scale_move_aw();
    scale_move_global();
    update_ranges();
  }

  // ---- Geweke support ----
  void draw_params_from_prior() {
    // beta is drawn on the raw covariate scale and mapped to the fitting
    // scale: std_j = raw_j * s_j for j >= 1, std_0 = raw_0 + sum raw_j m_j.
    for (int s = 0; s < n_sig; ++s) {
      Eigen::VectorXd raw(k);
      for (int j = 0; j < k; ++j) raw[j] = rng.normal(0.0, prior.beta_sd);
      beta(s, 0) = raw[0];
      for (int j = 1; j < k; ++j) {
        beta(s, j) = raw[j] * std_.scale()[j];
        beta(s, 0) += raw[j] * std_.mean()[j];
      }
    }
    if (sv) {
      auto draw_field = [&](Eigen::Vector2d& beta_a, double& sigma2,
                            Eigen::VectorXd& field) {
        beta_a = {rng.normal(0.0, prior.beta_a_sd),
                  rng.normal(0.0, prior.beta_a_sd)};
        sigma2 = rng.inverse_gamma(prior.sigma2_a_shape, prior.sigma2_a_scale);
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = rng.normal();
        field = Zfield * beta_a + std::sqrt(sigma2) * (Rachol * z);
      };
      draw_field(cf.beta_a11, cf.sigma2_a11, cf.log_a11);
      draw_field(cf.beta_a22, cf.sigma2_a22, cf.log_a22);
      draw_field(cf.beta_a21, cf.sigma2_a21, cf.a21);
    } else {
      cc.a11 = rng.trunc_normal_positive(0.0, prior.diag_halfnormal_sd);
      if (bivariate()) {
        cc.a22 = rng.trunc_normal_positive(0.0, prior.diag_halfnormal_sd);
        cc.a21 = rng.normal(0.0, prior.a21_sd);
      }
    }
    phi = 3.0 / rng.inverse_gamma(prior.range_shape, prior.range_scale);
    if (variant.anisotropic()) {
      phi_x = 3.0 / rng.inverse_gamma(prior.range_x_shape, range_x_scale_eff);
    }
    rebuild_kernel();
    refresh_coreg_vectors();
  }

  void geweke_data_step() {
    // Exact draw of (w, Y, indicators) given the parameter block, installed
    // as the sampler's state. Seed-day indicators follow the parameter-free
    // stationary law Bernoulli(1/t).
    Eigen::VectorXd zn(n);
    Eigen::VectorXd row_raw(k), row_std(k);
    for (int s = 0; s < n_sig; ++s) tied[s].clear();
    for (int tau = 1; tau < n_years; ++tau) {
      const int t = tau + 1;
      for (int s = 0; s < n_sig; ++s) {
        for (int i = 0; i < n; ++i) {
          const std::uint8_t seed_ind = rng.bernoulli(1.0 / t) ? 1 : 0;
          resolved[s][mcell(tau, 0, i)] = seed_ind;
          marks[s][mcell(tau, 0, i)] = seed_ind;
        }
      }
      for (int d = 1; d <= n_days; ++d) {
        const long sl = slice_of(tau, d);
        for (int p = 0; p < n_proc; ++p) {
          for (int i = 0; i < n; ++i) zn[i] = rng.normal();
          w[p].col(sl) = cllt.matrixL() * zn;
        }
        for (int i = 0; i < n; ++i) {
          const long o = sl * n + i;
          double lag_max = 0.0, lag_min = 0.0;
          if (bivariate()) {
            lag_max = resolved[0][mcell(tau, d - 1, i)];
            lag_min = resolved[1][mcell(tau, d - 1, i)];
          } else if (signals[0] == Signal::Max) {
            lag_max = resolved[0][mcell(tau, d - 1, i)];
          } else {
            lag_min = resolved[0][mcell(tau, d - 1, i)];
          }
          for (int j = 0; j < k; ++j) {
            row_raw[j] =
                col_value(cols[j], lag_max, lag_min, log_dist[i], trend[tau - 1]);
            row_std[j] = (row_raw[j] - std_.mean()[j]) / std_.scale()[j];
          }
          for (int s = 0; s < n_sig; ++s) {
            double vv;
            if (bivariate()) {
              vv = s == 0 ? d11[i] * w[0](i, sl)
                          : d21[i] * w[0](i, sl) + d22[i] * w[1](i, sl);
            } else {
              vv = d11[i] * w[0](i, sl);
            }
            const double eta = beta.row(s).dot(row_std) + vv;
            const double y = eta + rng.normal();
            Y(o, s) = y;
            const std::uint8_t ind = y > 0.0 ? 1 : 0;
            resolved[s][mcell(tau, d, i)] = ind;
            marks[s][mcell(tau, d, i)] = ind;
          }
        }
      }
    }
    rebuild_lag_columns();
    refresh_mu();
    refresh_v();
  }
};

GibbsSampler::GibbsSampler(const FitData& data, const VariantSpec& variant,
                           const PriorConfig& prior, std::vector<Signal> signals,
                           Rng rng)
    : impl_(std::make_unique<Impl>(data, variant, prior, std::move(signals), rng)) {}

GibbsSampler::~GibbsSampler() = default;
GibbsSampler::GibbsSampler(GibbsSampler&&) noexcept = default;

void GibbsSampler::sweep() { impl_->sweep(); }
void GibbsSampler::set_adapting(bool on) { impl_->adapting = on; }
void GibbsSampler::update_tied() { impl_->update_tied(); }
void GibbsSampler::update_y() { impl_->update_y(); }
void GibbsSampler::update_b() { impl_->update_b(); }
void GibbsSampler::update_w() { impl_->update_w(); }
void GibbsSampler::update_coreg() { impl_->update_coreg(); }
void GibbsSampler::update_ranges() { impl_->update_ranges(); }
void GibbsSampler::set_beta_std(const Eigen::MatrixXd& beta) {
  if (beta.rows() != impl_->n_sig || beta.cols() != impl_->k) {
    throw ConfigError("set_beta_std: shape mismatch");
  }
  impl_->beta = beta;
  impl_->refresh_mu();
}
void GibbsSampler::set_coreg_constant(const CoregConstant& a) {
  if (impl_->sv) throw ConfigError("set_coreg_constant: field variant");
  impl_->cc = a;
  impl_->refresh_coreg_vectors();
  impl_->refresh_v();
}
void GibbsSampler::set_phi(double phi) {
  impl_->phi = phi;
  impl_->rebuild_kernel();
}
void GibbsSampler::set_latent_y(const Eigen::MatrixXd& y) {
  if (y.rows() != impl_->Y.rows() || y.cols() != impl_->Y.cols()) {
    throw ConfigError("set_latent_y: shape mismatch");
  }
  impl_->Y = y;
}
int GibbsSampler::n_signals() const { return impl_->n_sig; }
int GibbsSampler::design_dim() const { return impl_->k; }
int GibbsSampler::n_processes() const { return impl_->n_proc; }
const Eigen::MatrixXd& GibbsSampler::beta_std() const { return impl_->beta; }
Eigen::MatrixXd GibbsSampler::beta_raw() const {
  return impl_->std_.back_transform(impl_->beta);
}
const Standardizer& GibbsSampler::standardizer() const { return impl_->std_; }
const CoregConstant& GibbsSampler::coreg_constant() const { return impl_->cc; }
const CoregField& GibbsSampler::coreg_field() const { return impl_->cf; }
double GibbsSampler::phi() const { return impl_->phi; }
double GibbsSampler::phi_x() const { return impl_->phi_x; }
const Eigen::MatrixXd& GibbsSampler::w_field(int process) const {
  return impl_->w[process];
}
double GibbsSampler::mean_w() const {
  double s = 0.0;
  long cnt = 0;
  for (int p = 0; p < impl_->n_proc; ++p) {
    s += impl_->w[p].sum();
    cnt += impl_->w[p].size();
  }
  return cnt > 0 ? s / cnt : 0.0;
}
const Eigen::MatrixXd& GibbsSampler::latent_y() const { return impl_->Y; }
std::span<const std::uint8_t> GibbsSampler::resolved(Signal s) const {
  for (std::size_t j = 0; j < impl_->signals.size(); ++j) {
    if (impl_->signals[j] == s) return impl_->resolved[j];
  }
  throw ConfigError("resolved: signal not fitted by this sampler");
}
double GibbsSampler::mh_acceptance_rate(const std::string& block) const {
  if (block == "range") return impl_->adapt_phi.frozen_rate();
  if (block == "range_x") return impl_->adapt_phi_x.frozen_rate();
  if (block == "scale_aw") return impl_->adapt_scale_aw.frozen_rate();
  if (block == "scale_global") return impl_->adapt_scale_global.frozen_rate();
  if (block == "coreg_field") {
    double acc = 0.0, tot = 0.0;
    for (const auto& fa : impl_->adapt_field) {
      for (const auto& a : fa) {
        acc += a.frozen_accept;
        tot += a.frozen_count;
      }
    }
    return tot > 0 ? acc / tot : std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("unknown MH block '" + block + "'");
}
void GibbsSampler::draw_params_from_prior() { impl_->draw_params_from_prior(); }
void GibbsSampler::geweke_data_step() { impl_->geweke_data_step(); }
Rng& GibbsSampler::rng() { return impl_->rng; }

// ---------------------------------------------------------------------------
// Chain driver and draw archive
// ---------------------------------------------------------------------------

namespace {

struct ParamWriter {
  std::vector<std::string> names;
  std::vector<std::function<double(const GibbsSampler&)>> getters;

  void add(const std::string& name,
           std::function<double(const GibbsSampler&)> get) {
    names.push_back(name);
    getters.push_back(std::move(get));
  }
};

std::string beta_name(Signal s, int j) {
  return std::string("beta_") + signal_name(s) + "[" + std::to_string(j) + "]";
}

ParamWriter make_param_writer(const VariantSpec& variant,
                              const std::vector<Signal>& signals, int k, int n,
                              const std::string& suffix) {
  ParamWriter pw;
  // Coefficient names already carry the signal, so only the shared scalars
  // take the sub-chain suffix in the univariate variant.
  for (std::size_t s = 0; s < signals.size(); ++s) {
    for (int j = 0; j < k; ++j) {
      pw.add(beta_name(signals[s], j),
             [s, j](const GibbsSampler& g) { return g.beta_raw()(s, j); });
    }
  }
  if (variant.spatially_varying() && signals.size() == 2) {
    for (int i = 0; i < n; ++i) {
      pw.add("a11_s[" + std::to_string(i) + "]",
             [i](const GibbsSampler& g) { return g.coreg_field().a11(i); });
    }
    for (int i = 0; i < n; ++i) {
      pw.add("a22_s[" + std::to_string(i) + "]",
             [i](const GibbsSampler& g) { return g.coreg_field().a22(i); });
    }
    for (int i = 0; i < n; ++i) {
      pw.add("a21_s[" + std::to_string(i) + "]",
             [i](const GibbsSampler& g) { return g.coreg_field().a21[i]; });
    }
    for (int j = 0; j < 2; ++j) {
      pw.add("beta_a11[" + std::to_string(j) + "]",
             [j](const GibbsSampler& g) { return g.coreg_field().beta_a11[j]; });
    }
    for (int j = 0; j < 2; ++j) {
      pw.add("beta_a22[" + std::to_string(j) + "]",
             [j](const GibbsSampler& g) { return g.coreg_field().beta_a22[j]; });
    }
    for (int j = 0; j < 2; ++j) {
      pw.add("beta_a21[" + std::to_string(j) + "]",
             [j](const GibbsSampler& g) { return g.coreg_field().beta_a21[j]; });
    }
    pw.add("sigma2_a11", [](const GibbsSampler& g) { return g.coreg_field().sigma2_a11; });
    pw.add("sigma2_a22", [](const GibbsSampler& g) { return g.coreg_field().sigma2_a22; });
    pw.add("sigma2_a21", [](const GibbsSampler& g) { return g.coreg_field().sigma2_a21; });
  } else {
    pw.add("a11" + suffix, [](const GibbsSampler& g) { return g.coreg_constant().a11; });
    if (signals.size() == 2) {
      pw.add("a22", [](const GibbsSampler& g) { return g.coreg_constant().a22; });
      pw.add("a21", [](const GibbsSampler& g) { return g.coreg_constant().a21; });
    }
  }
  pw.add("range_km" + suffix, [](const GibbsSampler& g) { return 3.0 / g.phi(); });
  if (variant.anisotropic()) {
    pw.add("range_x" + suffix, [](const GibbsSampler& g) { return 3.0 / g.phi_x(); });
  }
  return pw;
}

struct SubChain {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  std::vector<long> sweeps;
  std::vector<int> w_rows;
  std::vector<Eigen::MatrixXd> w0, w1;
};

SubChain run_sub_chain(const FitData& data, const SamplerConfig& config,
                       const VariantSpec& variant, std::vector<Signal> signals,
                       const std::string& suffix, Rng rng) {
  const long sweeps = config.sweeps;
  const long burn = std::lround(sweeps * config.burn_in_fraction);
  const long kept_span = sweeps - burn;
  if (config.thin_to < 1 || kept_span < config.thin_to) {
    throw ConfigError("thin_to exceeds the post-burn-in sweep count");
  }
  GibbsSampler sampler(data, variant, config.prior, signals, rng);
  sampler.set_adapting(true);

  ParamWriter pw =
      make_param_writer(variant, signals, sampler.design_dim(), data.n_sites(), suffix);

  SubChain sc;
  sc.names = pw.names;
  sc.values.resize(config.thin_to, static_cast<Eigen::Index>(pw.names.size()));
  sc.sweeps.resize(config.thin_to);

  const int w_store = std::min<int>(std::max(config.w_store, 0), config.thin_to);
  std::vector<char> want_w(config.thin_to, 0);
  for (int j = 0; j < w_store; ++j) {
    const int row = static_cast<int>(
        (static_cast<long>(j + 1) * config.thin_to) / w_store - 1);
    want_w[row] = 1;
  }

  int next_keep = 0;
  for (long s = 1; s <= sweeps; ++s) {
    if (s == burn + 1) sampler.set_adapting(false);
    sampler.sweep();
    const long target =
        next_keep < config.thin_to
            ? burn + ((static_cast<long>(next_keep) + 1) * kept_span) / config.thin_to
            : -1;
    if (s == target) {
      for (std::size_t p = 0; p < pw.getters.size(); ++p) {
        const double val = pw.getters[p](sampler);
        if (!std::isfinite(val)) {
          throw NumericalError("non-finite draw for " + pw.names[p] +
                               " at sweep " + std::to_string(s));
        }
        sc.values(next_keep, static_cast<Eigen::Index>(p)) = val;
      }
      sc.sweeps[next_keep] = s;
      if (want_w[next_keep]) {
        sc.w_rows.push_back(next_keep);
        sc.w0.push_back(sampler.w_field(0));
        sc.w1.push_back(sampler.n_processes() > 1 ? sampler.w_field(1)
                                                  : Eigen::MatrixXd());
      }
      ++next_keep;
    }
  }
  return sc;
}

}  // namespace

int PosteriorDraws::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw ConfigError("unknown parameter '" + name + "'");
}

double PosteriorDraws::posterior_mean(const std::string& name) const {
  const int j = param_index(name);
  double s = 0.0;
  long cnt = 0;
  for (const auto& ch : chains) {
    s += ch.values.col(j).sum();
    cnt += ch.values.rows();
  }
  if (cnt == 0) throw DataError("posterior_mean: no draws");
  return s / cnt;
}

std::pair<double, double> PosteriorDraws::credible_interval(
    const std::string& name, double level) const {
  const int j = param_index(name);
  std::vector<double> pooled;
  for (const auto& ch : chains) {
    for (Eigen::Index r = 0; r < ch.values.rows(); ++r) {
      pooled.push_back(ch.values(r, j));
    }
  }
  if (pooled.empty()) throw DataError("credible_interval: no draws");
  std::sort(pooled.begin(), pooled.end());
  const double alpha = 0.5 * (1.0 - level);
  return {quantile_type7_sorted(pooled, alpha),
          quantile_type7_sorted(pooled, 1.0 - alpha)};
}

PosteriorDraws run_chain(const FitData& data, const SamplerConfig& config,
                         int chain_id) {
  PosteriorDraws out;
  out.variant = config.variant;
  if (config.variant.stationary()) return out;  // analytic, nothing to sample

  const Rng base(config.seed);
  ChainDraws cd;
  cd.chain_id = chain_id;
  if (config.variant.id == Variant::M1) {
    SubChain mx = run_sub_chain(data, config, config.variant, {Signal::Max},
                                "_max", base.child(0x10001u + 4u * chain_id));
    SubChain mn = run_sub_chain(data, config, config.variant, {Signal::Min},
                                "_min", base.child(0x10002u + 4u * chain_id));
    out.names = mx.names;
    out.names.insert(out.names.end(), mn.names.begin(), mn.names.end());
    cd.values.resize(mx.values.rows(), mx.values.cols() + mn.values.cols());
    cd.values << mx.values, mn.values;
    cd.sweep = mx.sweeps;
    cd.w_draw_rows = mx.w_rows;
    cd.w0 = std::move(mx.w0);
    cd.w1.reserve(mn.w0.size());
    for (auto& m : mn.w0) cd.w1.push_back(std::move(m));
  } else {
    SubChain sc = run_sub_chain(data, config, config.variant,
                                {Signal::Max, Signal::Min}, "",
                                base.child(0x10000u + 4u * chain_id));
    out.names = sc.names;
    cd.values = std::move(sc.values);
    cd.sweep = std::move(sc.sweeps);
    cd.w_draw_rows = std::move(sc.w_rows);
    cd.w0 = std::move(sc.w0);
    cd.w1 = std::move(sc.w1);
  }
  out.chains.push_back(std::move(cd));
  return out;
}

PosteriorDraws run_chains(const FitData& data, const SamplerConfig& config) {
  PosteriorDraws out;
  out.variant = config.variant;
  if (config.variant.stationary()) return out;
  if (config.n_chains < 1) throw ConfigError("n_chains must be >= 1");

  std::vector<PosteriorDraws> per_chain(config.n_chains);
  const int workers = std::max(1, std::min(config.threads, config.n_chains));
  if (workers == 1) {
    for (int c = 0; c < config.n_chains; ++c) {
      per_chain[c] = run_chain(data, config, c);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(config.n_chains);
    for (int wkr = 0; wkr < workers; ++wkr) {
      pool.emplace_back([&]() {
        for (;;) {
          const int c = next.fetch_add(1);
          if (c >= config.n_chains) return;
          try {
            per_chain[c] = run_chain(data, config, c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  out.names = per_chain[0].names;
  for (int c = 0; c < config.n_chains; ++c) {
    out.chains.push_back(std::move(per_chain[c].chains[0]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics
// ---------------------------------------------------------------------------

namespace {

std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  for (const auto& c : chains) {
    const Eigen::Index half = c.size() / 2;
    if (half < 2) throw DataError("diagnostics: chains too short to split");
    halves.push_back(c.head(half));
    halves.push_back(c.tail(half));
  }
  return halves;
}

double autocov(const Eigen::VectorXd& x, double mean, int lag) {
  const Eigen::Index m = x.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + lag < m; ++i) {
    s += (x[i] - mean) * (x[i + lag] - mean);
  }
  return s / static_cast<double>(m);
}

}  // namespace

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2) throw ConfigError("split_rhat needs at least two chains");
  const auto halves = split_halves(chains);
  const int m = static_cast<int>(halves.size());
  const double len = static_cast<double>(halves[0].size());
  double grand = 0.0;
  std::vector<double> means(m), vars(m);
  for (int j = 0; j < m; ++j) {
    means[j] = halves[j].mean();
    vars[j] = (halves[j].array() - means[j]).square().sum() / (len - 1.0);
    grand += means[j];
  }
  grand /= m;
  double b = 0.0, wv = 0.0;
  for (int j = 0; j < m; ++j) {
    b += (means[j] - grand) * (means[j] - grand);
    wv += vars[j];
  }
  b *= len / (m - 1.0);
  wv /= m;
  if (wv <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (len - 1.0) / len * wv + b / len;
  return std::sqrt(var_plus / wv);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty()) throw DataError("ess: no chains");
  std::vector<Eigen::VectorXd> parts =
      chains.size() >= 2 ? split_halves(chains) : chains;
  const int m = static_cast<int>(parts.size());
  const Eigen::Index len = parts[0].size();
  for (const auto& p : parts) {
    if (p.size() != len) throw DataError("ess: chain length mismatch");
  }
  std::vector<double> means(m), vars(m);
  double grand = 0.0;
  for (int j = 0; j < m; ++j) {
    means[j] = parts[j].mean();
    vars[j] = (parts[j].array() - means[j]).square().sum() /
              static_cast<double>(len - 1);
    grand += means[j];
  }
  grand /= m;
  double wv = 0.0;
  for (double s : vars) wv += s;
  wv /= m;
  double b_over_n = 0.0;
  if (m > 1) {
    for (double mm : means) b_over_n += (mm - grand) * (mm - grand);
    b_over_n /= (m - 1.0);
  }
  const double var_plus =
      (static_cast<double>(len - 1) / len) * wv + b_over_n;
  if (var_plus <= 0.0) return static_cast<double>(m) * len;

  // Combined autocorrelations, truncated by Geyer's initial positive pairs.
  auto rho_at = [&](int t) {
    double acv = 0.0;
    for (int j = 0; j < m; ++j) acv += autocov(parts[j], means[j], t);
    acv /= m;
    return 1.0 - (wv - acv) / var_plus;
  };
  double sum = 0.0;
  for (int t = 1; t + 1 < len; t += 2) {
    const double pair = rho_at(t) + rho_at(t + 1);
    if (pair < 0.0) break;
    sum += pair;
  }
  const double tau = 1.0 + 2.0 * sum;
  return static_cast<double>(m) * static_cast<double>(len) / tau;
}

std::vector<DiagnosticRow> diagnostics(const PosteriorDraws& draws) {
  if (draws.chains.size() < 2) {
    throw ConfigError("diagnostics: split R-hat needs at least two chains");
  }
  std::vector<DiagnosticRow> out;
  for (std::size_t p = 0; p < draws.names.size(); ++p) {
    std::vector<Eigen::VectorXd> cols;
    for (const auto& ch : draws.chains) {
      cols.push_back(ch.values.col(static_cast<Eigen::Index>(p)));
    }
    out.push_back({draws.names[p], split_rhat(cols), effective_sample_size(cols)});
  }
  return out;
}

}  // namespace bivrec
