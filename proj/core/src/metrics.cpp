#include "bivrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bivrec/csv.hpp"
#include "bivrec/design.hpp"
#include "bivrec/gp.hpp"
#include "bivrec/predict.hpp"

namespace bivrec {

FoldPlan FoldPlan::seeded(int n_stations, int n_groups, std::uint64_t seed) {
  if (n_groups < 2 || n_groups > n_stations) {
    throw ConfigError("FoldPlan: need 2 <= groups <= stations");
  }
  std::vector<int> order(n_stations);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n_stations - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  FoldPlan plan;
  plan.groups.resize(n_groups);
  for (int i = 0; i < n_stations; ++i) {
    plan.groups[i % n_groups].push_back(order[i]);
  }
  for (auto& g : plan.groups) std::sort(g.begin(), g.end());
  return plan;
}

JaccardScore bayes_jaccard(const Eigen::MatrixXd& probs,
                           std::span<const std::uint8_t> observed) {
  if (observed.empty()) throw DataError("bayes_jaccard: empty index set");
  if (probs.cols() != static_cast<Eigen::Index>(observed.size())) {
    throw DataError("bayes_jaccard: probability/indicator shape mismatch");
  }
  JaccardScore score;
  score.per_draw.resize(probs.rows());
  for (Eigen::Index b = 0; b < probs.rows(); ++b) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (Eigen::Index i = 0; i < probs.cols(); ++i) {
      const double p = probs(b, i);
      if (observed[static_cast<std::size_t>(i)]) {
        tp += p;
        fn += 1.0 - p;
      } else {
        fp += p;
      }
    }
    const double denom = tp + fp + fn;
    score.per_draw[b] = denom > 0.0 ? tp / denom
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  score.mean = score.per_draw.mean();
  return score;
}

std::pair<double, double> auc_brier(std::span<const double> probs,
                                    std::span<const std::uint8_t> labels) {
  if (probs.size() != labels.size() || probs.empty()) {
    throw DataError("auc_brier: shape mismatch");
  }
  const std::size_t n = probs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  // Average ranks over tied probability runs, then the Mann-Whitney U.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t u = i; u <= j; ++u) rank[order[u]] = avg;
    i = j + 1;
  }
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  double brier = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const double y = labels[u] ? 1.0 : 0.0;
    brier += (probs[u] - y) * (probs[u] - y);
    if (labels[u]) {
      rank_sum_pos += rank[u];
      ++n_pos;
    }
  }
  brier /= static_cast<double>(n);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("auc_brier: AUC undefined with a single class");
  }
  const double u_stat =
      rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  const double auc = u_stat / (static_cast<double>(n_pos) * n_neg);
  return {auc, brier};
}

namespace {

constexpr double kMinProb = 1e-300;
constexpr double kMaxProb = 1.0 - 1e-16;

double clamp_prob(double p) { return std::min(std::max(p, kMinProb), kMaxProb); }

struct FoldAccumulator {
  // [event][period] running TP/FP/FN per draw
  std::array<std::array<Eigen::VectorXd, 2>, 3> tp, fp, fn;
  std::array<std::array<long, 2>, 3> cells{};

  FoldAccumulator(int n_draws) {
    for (int e = 0; e < 3; ++e) {
      for (int p = 0; p < 2; ++p) {
        tp[e][p] = Eigen::VectorXd::Zero(n_draws);
        fp[e][p] = Eigen::VectorXd::Zero(n_draws);
        fn[e][p] = Eigen::VectorXd::Zero(n_draws);
      }
    }
  }
  void add(int event, int period, int draw, double p, bool obs) {
    if (obs) {
      tp[event][period][draw] += p;
      fn[event][period][draw] += 1.0 - p;
    } else {
      fp[event][period][draw] += p;
    }
    if (draw == 0) ++cells[event][period];
  }
  double mean_j(int event, int period) const {
    const auto& t = tp[event][period];
    double s = 0.0;
    for (Eigen::Index b = 0; b < t.size(); ++b) {
      const double denom =
          t[b] + fp[event][period][b] + fn[event][period][b];
      s += denom > 0.0 ? t[b] / denom : 0.0;
    }
    return s / static_cast<double>(t.size());
  }
};

struct HoldoutDrawParams {
  Eigen::Matrix<double, 2, kBivariateDesignDim> coef_biv;
  Eigen::Matrix<double, 2, kUnivariateDesignDim> coef_uni;
  Eigen::VectorXd a11, a22, a21;  // per holdout site
  double range = 0.0;
  std::array<double, 2> range_uni{0.0, 0.0};
  double range_x = 0.0;
};

}  // namespace

std::vector<CvRow> run_cv(const RecordPanel& panel,
                          const std::vector<StationMeta>& stations,
                          const SamplerConfig& config, const FoldPlan& plan,
                          const CvOptions& opts) {
  const VariantSpec variant = config.variant;
  const SeriesLayout& layout = panel.layout;
  const int T = layout.n_years;
  const int n_days = layout.n_days;
  if (T < 3) throw DataError("run_cv: need T >= 3");
  const int t_split = opts.t_split > 0 ? opts.t_split : 1 + (T + 1) / 2;
  if (t_split < 2 || t_split >= T) throw ConfigError("run_cv: bad t_split");

  const int n_all = panel.n_sites();
  std::vector<char> in_any;
  in_any.assign(n_all, 0);
  for (const auto& g : plan.groups) {
    for (int i : g) {
      if (i < 0 || i >= n_all || in_any[i]) {
        throw ConfigError("run_cv: fold plan is not a partition");
      }
      in_any[i] = 1;
    }
  }

  double fold_mean[3][2] = {{0, 0}, {0, 0}, {0, 0}};
  int n_folds = 0;

  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    const std::vector<int>& holdout = plan.groups[g];
    if (holdout.empty()) continue;
    std::vector<int> retained;
    for (int i = 0; i < n_all; ++i) {
      if (std::find(holdout.begin(), holdout.end(), i) == holdout.end()) {
        retained.push_back(i);
      }
    }
    if (retained.size() < 2) throw ConfigError("run_cv: fold retains too few stations");

    // Sub-panel and sub-stations for the fit.
    RecordPanel sub;
    sub.layout = layout;
    std::vector<StationMeta> sub_meta;
    for (int i : retained) {
      sub.site_ids.push_back(panel.site_ids[i]);
      sub_meta.push_back(stations[i]);
    }
    const long per_site = layout.cells_per_site();
    for (int s = 0; s < 2; ++s) {
      sub.marks[s].resize(per_site * retained.size());
      for (std::size_t j = 0; j < retained.size(); ++j) {
        std::copy(panel.marks[s].begin() + per_site * retained[j],
                  panel.marks[s].begin() + per_site * (retained[j] + 1),
                  sub.marks[s].begin() + per_site * static_cast<long>(j));
      }
    }

    const bool aniso = variant.anisotropic();
    FitData fd = prepare_fit_data(sub, sub_meta, aniso);

    // Holdout geometry; the climate covariate is always kriged within fold.
    std::vector<GpSite> hold_sites;
    Eigen::VectorXd hold_logdist(holdout.size());
    for (std::size_t h = 0; h < holdout.size(); ++h) {
      const StationMeta& sm = stations[holdout[h]];
      hold_sites.push_back(GpSite{sm.x_km, sm.y_km, 0.0});
      hold_logdist[static_cast<Eigen::Index>(h)] = std::log1p(sm.dist_coast_km);
    }
    if (aniso) {
      Eigen::VectorXd kriged = simple_krige_covariate(
          fd.covariate_x, fd.gp_sites, hold_sites, 1.0 / 300.0);
      for (std::size_t h = 0; h < holdout.size(); ++h) {
        hold_sites[h].covariate = kriged[static_cast<Eigen::Index>(h)];
      }
    }
    const int m_h = static_cast<int>(holdout.size());

    // ---- stationary reference: deterministic probabilities 1/t ----
    if (variant.stationary()) {
      FoldAccumulator acc(std::max(1, opts.m0_draws));
      for (int tau = 1; tau < T; ++tau) {
        const int t = tau + 1;
        const int period = t <= t_split ? 0 : 1;
        const double p = 1.0 / t;
        for (int d = 1; d <= n_days; ++d) {
          for (int h = 0; h < m_h; ++h) {
            const MarkCode cx = panel.mark(Signal::Max, holdout[h], tau, d);
            const MarkCode cn = panel.mark(Signal::Min, holdout[h], tau, d);
            for (int b = 0; b < std::max(1, opts.m0_draws); ++b) {
              if (cx <= 1) acc.add(0, period, b, p, cx == 1);
              if (cn <= 1) acc.add(1, period, b, p, cn == 1);
              if (cx <= 1 && cn <= 1) {
                acc.add(2, period, b, p * p, cx == 1 && cn == 1);
              }
            }
          }
        }
      }
      for (int e = 0; e < 3; ++e) {
        for (int p = 0; p < 2; ++p) {
          if (acc.cells[e][p] == 0) {
            throw DataError("run_cv: fold with no valid cells");
          }
          fold_mean[e][p] += acc.mean_j(e, p);
        }
      }
      ++n_folds;
      continue;
    }

    // ---- sampled variants: fit, then one-step-ahead holdout probabilities --
    SamplerConfig fold_config = config;
    fold_config.seed = Rng::mix(config.seed, 0xCF01D000ull + g);
    PosteriorDraws draws = run_chains(fd, fold_config);

    const bool univariate = variant.id == Variant::M1;
    const bool sv = variant.spatially_varying();

    // Parameter column lookup.
    auto pidx = [&](const std::string& name) { return draws.param_index(name); };

    // Field kriging system (fixed decay) for spatially varying A.
    KrigeSystem field_sys;
    Eigen::MatrixXd z_obs, z_hold;
    if (sv) {
      field_sys = krige_system(KernelSpec::iso(config.prior.phi_a), fd.gp_sites,
                               hold_sites);
      z_obs.resize(fd.n_sites(), 2);
      for (int i = 0; i < fd.n_sites(); ++i) {
        z_obs(i, 0) = 1.0;
        z_obs(i, 1) = fd.log_dist[i];
      }
      z_hold.resize(m_h, 2);
      for (int h = 0; h < m_h; ++h) {
        z_hold(h, 0) = 1.0;
        z_hold(h, 1) = hold_logdist[h];
      }
    }

    int total_draws = 0;
    for (const auto& ch : draws.chains) {
      total_draws += static_cast<int>(ch.w_draw_rows.size());
    }
    if (total_draws == 0) throw ConfigError("run_cv: no archived day fields");
    FoldAccumulator acc(total_draws);

    Rng fold_rng(Rng::mix(config.seed, 0xCF02D000ull + g));
    int ordinal = 0;
    Eigen::MatrixXd w_h(m_h, 2);
    for (const auto& ch : draws.chains) {
      for (std::size_t wi = 0; wi < ch.w_draw_rows.size(); ++wi, ++ordinal) {
        const int row = ch.w_draw_rows[wi];
        const auto val = [&](const std::string& name) {
          return ch.values(row, pidx(name));
        };
        HoldoutDrawParams hp;
        KrigeSystem sys[2];
        if (univariate) {
          for (int s = 0; s < 2; ++s) {
            const std::string suffix = s == 0 ? "_max" : "_min";
            const std::string base = s == 0 ? "beta_max[" : "beta_min[";
            for (int j = 0; j < kUnivariateDesignDim; ++j) {
              hp.coef_uni(s, j) = val(base + std::to_string(j) + "]");
            }
            hp.range_uni[s] = val("range_km" + suffix);
            sys[s] = krige_system(KernelSpec::iso(3.0 / hp.range_uni[s]),
                                  fd.gp_sites, hold_sites);
          }
        } else {
          for (int s = 0; s < 2; ++s) {
            const std::string base = s == 0 ? "beta_max[" : "beta_min[";
            for (int j = 0; j < kBivariateDesignDim; ++j) {
              hp.coef_biv(s, j) = val(base + std::to_string(j) + "]");
            }
          }
          hp.range = val("range_km");
          KernelSpec k = KernelSpec::iso(3.0 / hp.range);
          if (aniso) {
            hp.range_x = val("range_x");
            k = KernelSpec::anisotropic(3.0 / hp.range, 3.0 / hp.range_x);
          }
          sys[0] = krige_system(k, fd.gp_sites, hold_sites);
          if (sv) {
            auto krige_field = [&](const std::string& stem, bool log_scale) {
              Eigen::VectorXd f(fd.n_sites());
              for (int i = 0; i < fd.n_sites(); ++i) {
                const double raw = val(stem + "[" + std::to_string(i) + "]");
                f[i] = log_scale ? std::log(raw) : raw;
              }
              const Eigen::Vector2d b{val("beta_" + stem + "[0]"),
                                      val("beta_" + stem + "[1]")};
              const double s2 = val("sigma2_" + stem);
              Eigen::VectorXd z(m_h);
              for (int h = 0; h < m_h; ++h) z[h] = fold_rng.normal();
              const Eigen::VectorXd noise = field_sys.cond_chol.llt.matrixL() * z;
              Eigen::VectorXd out = z_hold * b +
                                    field_sys.weights * (f - z_obs * b) +
                                    std::sqrt(s2) * noise;
              if (log_scale) out = out.array().exp();
              return out;
            };
            hp.a11 = krige_field("a11_s", true);
            hp.a22 = krige_field("a22_s", true);
            hp.a21 = krige_field("a21_s", false);
          } else {
            hp.a11 = Eigen::VectorXd::Constant(m_h, val("a11"));
            hp.a22 = Eigen::VectorXd::Constant(m_h, val("a22"));
            hp.a21 = Eigen::VectorXd::Constant(m_h, val("a21"));
          }
        }
        Eigen::VectorXd a11_uni[2];
        if (univariate) {
          a11_uni[0] = Eigen::VectorXd::Constant(m_h, val("a11_max"));
          a11_uni[1] = Eigen::VectorXd::Constant(m_h, val("a11_min"));
        }

        for (int tau = 1; tau < T; ++tau) {
          const int t = tau + 1;
          const int period = t <= t_split ? 0 : 1;
          const double trend = probit(1.0 / t);
          for (int d = 1; d <= n_days; ++d) {
            const long sl = static_cast<long>(tau - 1) * n_days + (d - 1);
            if (univariate) {
              w_h.col(0) = sys[0].draw(ch.w0[wi].col(sl), fold_rng);
              w_h.col(1) = sys[1].draw(ch.w1[wi].col(sl), fold_rng);
            } else {
              w_h.col(0) = sys[0].draw(ch.w0[wi].col(sl), fold_rng);
              w_h.col(1) = sys[0].draw(ch.w1[wi].col(sl), fold_rng);
            }
            for (int h = 0; h < m_h; ++h) {
              const int site = holdout[h];
              // Observed previous-day indicators; lag ties resolve per draw.
              auto lag_value = [&](Signal sig) {
                const MarkCode c = panel.mark(sig, site, tau, d - 1);
                if (c <= 1) return static_cast<double>(c);
                return fold_rng.bernoulli(1.0 / c) ? 1.0 : 0.0;
              };
              const double lag_max = lag_value(Signal::Max);
              const double lag_min = lag_value(Signal::Min);
              double p_sig[2];
              if (univariate) {
                for (int s = 0; s < 2; ++s) {
                  const double lag = s == 0 ? lag_max : lag_min;
                  const auto& cb = hp.coef_uni;
                  double eta = cb(s, 0) + cb(s, 1) * lag +
                               cb(s, 2) * hold_logdist[h] + cb(s, 3) * trend +
                               cb(s, 4) * trend * lag +
                               cb(s, 5) * trend * hold_logdist[h];
                  eta += a11_uni[s][h] * w_h(h, s);
                  p_sig[s] = clamp_prob(probit_inv(eta));
                }
              } else {
                const auto& cb = hp.coef_biv;
                for (int s = 0; s < 2; ++s) {
                  double eta = cb(s, 0) + cb(s, 1) * lag_max +
                               cb(s, 2) * lag_min + cb(s, 3) * hold_logdist[h] +
                               cb(s, 4) * trend + cb(s, 5) * trend * lag_max +
                               cb(s, 6) * trend * lag_min +
                               cb(s, 7) * trend * hold_logdist[h];
                  eta += s == 0 ? hp.a11[h] * w_h(h, 0)
                                : hp.a21[h] * w_h(h, 0) + hp.a22[h] * w_h(h, 1);
                  p_sig[s] = clamp_prob(probit_inv(eta));
                }
              }
              const MarkCode cx = panel.mark(Signal::Max, site, tau, d);
              const MarkCode cn = panel.mark(Signal::Min, site, tau, d);
              if (cx <= 1) acc.add(0, period, ordinal, p_sig[0], cx == 1);
              if (cn <= 1) acc.add(1, period, ordinal, p_sig[1], cn == 1);
              if (cx <= 1 && cn <= 1) {
                acc.add(2, period, ordinal, p_sig[0] * p_sig[1],
                        cx == 1 && cn == 1);
              }
            }
          }
        }
      }
    }
    for (int e = 0; e < 3; ++e) {
      for (int p = 0; p < 2; ++p) {
        if (acc.cells[e][p] == 0) {
          throw DataError("run_cv: fold with no valid cells");
        }
        fold_mean[e][p] += acc.mean_j(e, p);
      }
    }
    ++n_folds;
  }

  if (n_folds == 0) throw ConfigError("run_cv: empty fold plan");
  std::vector<CvRow> rows;
  const char* events[3] = {"max", "min", "joint"};
  const char* periods[2] = {"J1", "J2"};
  for (int e = 0; e < 3; ++e) {
    for (int p = 0; p < 2; ++p) {
      rows.push_back(CvRow{variant.name(), events[e], periods[p],
                           fold_mean[e][p] / n_folds});
    }
  }
  return rows;
}

void write_cv_report_csv(const std::string& path, const std::vector<CvRow>& rows,
                         const std::string& meta) {
  CsvWriter w(path, meta, "model,event,period,J_mean");
  for (const auto& r : rows) {
    w.write_row({r.model, r.event, r.period, fmt_short(r.j_mean)});
  }
  w.close();
}

}  // namespace bivrec
