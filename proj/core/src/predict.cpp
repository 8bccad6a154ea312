#include "bivrec/predict.hpp"

#include <cmath>

#include "bivrec/design.hpp"

namespace bivrec {

namespace {

constexpr double kMinProb = 1e-300;
constexpr double kMaxProb = 1.0 - 1e-16;

double clamp_prob(double p) { return std::min(std::max(p, kMinProb), kMaxProb); }

std::vector<GpSite> station_sites(const FitArtifacts& art) {
  std::vector<GpSite> s(art.stations.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = GpSite{art.stations[i].x_km, art.stations[i].y_km,
                  art.station_covariate.size() > 0
                      ? art.station_covariate[static_cast<Eigen::Index>(i)]
                      : 0.0};
  }
  return s;
}

std::vector<GpSite> grid_sites(const GridSpec& grid, const Eigen::VectorXd& cov) {
  std::vector<GpSite> s(grid.cells.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = GpSite{grid.cells[i].x_km, grid.cells[i].y_km,
                  cov.size() > 0 ? cov[static_cast<Eigen::Index>(i)] : 0.0};
  }
  return s;
}

// Column positions of each parameter in the draw matrix.
struct BivParamIndex {
  std::array<std::array<int, kBivariateDesignDim>, 2> beta;
  int a11 = -1, a22 = -1, a21 = -1;
  std::vector<int> a11_s, a22_s, a21_s;
  std::array<int, 2> beta_a11{-1, -1}, beta_a22{-1, -1}, beta_a21{-1, -1};
  int sigma2_a11 = -1, sigma2_a22 = -1, sigma2_a21 = -1;
  int range = -1, range_x = -1;
};

BivParamIndex resolve_bivariate(const PosteriorDraws& d, int n_sites) {
  BivParamIndex ix;
  for (int s = 0; s < 2; ++s) {
    const std::string base = s == 0 ? "beta_max[" : "beta_min[";
    for (int j = 0; j < kBivariateDesignDim; ++j) {
      ix.beta[s][j] = d.param_index(base + std::to_string(j) + "]");
    }
  }
  ix.range = d.param_index("range_km");
  if (d.variant.anisotropic()) ix.range_x = d.param_index("range_x");
  if (d.variant.spatially_varying()) {
    for (int i = 0; i < n_sites; ++i) {
      ix.a11_s.push_back(d.param_index("a11_s[" + std::to_string(i) + "]"));
      ix.a22_s.push_back(d.param_index("a22_s[" + std::to_string(i) + "]"));
      ix.a21_s.push_back(d.param_index("a21_s[" + std::to_string(i) + "]"));
    }
    for (int j = 0; j < 2; ++j) {
      ix.beta_a11[j] = d.param_index("beta_a11[" + std::to_string(j) + "]");
      ix.beta_a22[j] = d.param_index("beta_a22[" + std::to_string(j) + "]");
      ix.beta_a21[j] = d.param_index("beta_a21[" + std::to_string(j) + "]");
    }
    ix.sigma2_a11 = d.param_index("sigma2_a11");
    ix.sigma2_a22 = d.param_index("sigma2_a22");
    ix.sigma2_a21 = d.param_index("sigma2_a21");
  } else {
    ix.a11 = d.param_index("a11");
    ix.a22 = d.param_index("a22");
    ix.a21 = d.param_index("a21");
  }
  return ix;
}

struct UniParamIndex {
  std::array<std::array<int, kUnivariateDesignDim>, 2> beta;
  std::array<int, 2> a11{-1, -1};
  std::array<int, 2> range{-1, -1};
};

UniParamIndex resolve_univariate(const PosteriorDraws& d) {
  UniParamIndex ix;
  for (int s = 0; s < 2; ++s) {
    const std::string base = s == 0 ? "beta_max[" : "beta_min[";
    const std::string suffix = s == 0 ? "_max" : "_min";
    for (int j = 0; j < kUnivariateDesignDim; ++j) {
      ix.beta[s][j] = d.param_index(base + std::to_string(j) + "]");
    }
    ix.a11[s] = d.param_index("a11" + suffix);
    ix.range[s] = d.param_index("range_km" + suffix);
  }
  return ix;
}

}  // namespace

Eigen::MatrixXd seed_day_probabilities(const RecordPanel& panel, double eps) {
  if (panel.n_sites() == 0) {
    throw DataError("seed_day_probabilities: no stations with seed-day data");
  }
  const int T = panel.layout.n_years;
  Eigen::MatrixXd p(T, 2);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < 2; ++s) {
      long ones = 0;
      for (int i = 0; i < panel.n_sites(); ++i) {
        if (panel.mark(static_cast<Signal>(s), i, t, 0) == kMarkOne) ++ones;
      }
      const double raw = static_cast<double>(ones) / panel.n_sites();
      p(t, s) = std::min(std::max(raw, eps), 1.0 - eps);
    }
  }
  return p;
}

Eigen::VectorXd krige_grid_covariate(const GridSpec& grid,
                                     const FitArtifacts& art) {
  const int m = grid.size();
  Eigen::VectorXd out(m);
  std::vector<int> missing;
  for (int i = 0; i < m; ++i) {
    if (grid.cells[i].has_sx()) {
      if (!(grid.cells[i].sx > 0.0)) {
        throw DataError("grid cell " + grid.cells[i].id + " has non-positive sx");
      }
      out[i] = std::log(grid.cells[i].sx);
    } else {
      missing.push_back(i);
    }
  }
  if (!missing.empty()) {
    if (art.station_covariate.size() == 0) {
      throw ConfigError("grid lacks sx and the fit carries no station covariate");
    }
    std::vector<GpSite> obs = station_sites(art);
    std::vector<GpSite> tgt;
    for (int i : missing) {
      tgt.push_back(GpSite{grid.cells[i].x_km, grid.cells[i].y_km, 0.0});
    }
    Eigen::VectorXd filled = simple_krige_covariate(
        art.station_covariate, obs, tgt, art.covariate_krige_phi);
    for (std::size_t j = 0; j < missing.size(); ++j) out[missing[j]] = filled[j];
  }
  return out;
}

int predictive_draw_count(const FitArtifacts& art) {
  if (art.variant.stationary()) return art.m0_draws;
  int c = 0;
  for (const auto& ch : art.draws.chains) {
    c += static_cast<int>(ch.w_draw_rows.size());
  }
  return c;
}

void simulate_posterior_predictive(const FitArtifacts& art, const GridSpec& grid,
                                   std::span<const int> years, std::uint64_t seed,
                                   std::span<PredictiveSink* const> sinks) {
  const int m = grid.size();
  if (m == 0) throw DataError("simulate_posterior_predictive: empty grid");
  const int T = art.layout.n_years;
  const int n_days = art.layout.n_days;
  for (int t : years) {
    if (t < 2 || t > T) {
      throw ConfigError("prediction year t=" + std::to_string(t) +
                        " outside [2, T]");
    }
  }

  Eigen::VectorXd grid_logdist(m);
  for (int i = 0; i < m; ++i) {
    if (grid.cells[i].dist_coast_km < 0.0) {
      throw DataError("grid cell " + grid.cells[i].id + " has negative distance");
    }
    grid_logdist[i] = std::log1p(grid.cells[i].dist_coast_km);
  }

  const bool aniso = art.variant.anisotropic();
  Eigen::VectorXd grid_cov;
  if (aniso) grid_cov = krige_grid_covariate(grid, art);

  const std::vector<GpSite> obs_sites = station_sites(art);
  const std::vector<GpSite> tgt_sites = grid_sites(grid, grid_cov);
  const int n = static_cast<int>(obs_sites.size());

  const Rng base(seed);
  Eigen::MatrixXd prob(m, 2), ind(m, 2);

  auto emit_seed = [&](int ordinal, int t, Rng& rng) {
    for (int i = 0; i < m; ++i) {
      for (int s = 0; s < 2; ++s) {
        ind(i, s) = rng.bernoulli(art.seed_prob(t - 1, s)) ? 1.0 : 0.0;
      }
    }
    DaySlice slice{ordinal, t, 0, art.layout.day_label(0), nullptr, &ind};
    for (auto* sink : sinks) sink->on_slice(slice);
  };

  auto emit_day = [&](int ordinal, int t, int d) {
    DaySlice slice{ordinal, t, d, art.layout.day_label(d), &prob, &ind};
    for (auto* sink : sinks) sink->on_slice(slice);
  };

  // ---- M0: analytic stationary probabilities, no draw archive ----
  if (art.variant.stationary()) {
    for (int b = 0; b < art.m0_draws; ++b) {
      Rng rng = base.child(b);
      for (auto* sink : sinks) sink->begin_draw(b);
      for (int t : years) {
        emit_seed(b, t, rng);
        const double p = 1.0 / t;
        for (int d = 1; d <= n_days; ++d) {
          for (int i = 0; i < m; ++i) {
            for (int s = 0; s < 2; ++s) {
              prob(i, s) = p;
              ind(i, s) = rng.bernoulli(p) ? 1.0 : 0.0;
            }
          }
          emit_day(b, t, d);
        }
      }
      for (auto* sink : sinks) sink->end_draw(b);
    }
    return;
  }

  // ---- sampled variants ----
  const bool univariate = art.draws.variant.id == Variant::M1;
  BivParamIndex bix;
  UniParamIndex uix;
  if (univariate) {
    uix = resolve_univariate(art.draws);
  } else {
    bix = resolve_bivariate(art.draws, n);
  }

  // Field kriging pieces are draw-independent: phi_a is fixed.
  const bool sv = art.variant.spatially_varying();
  KrigeSystem field_sys;
  Eigen::MatrixXd z_obs, z_grid;
  if (sv) {
    field_sys = krige_system(KernelSpec::iso(art.phi_a), obs_sites, tgt_sites);
    z_obs.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      z_obs(i, 0) = 1.0;
      z_obs(i, 1) = std::log1p(art.stations[i].dist_coast_km);
    }
    z_grid.resize(m, 2);
    for (int i = 0; i < m; ++i) {
      z_grid(i, 0) = 1.0;
      z_grid(i, 1) = grid_logdist[i];
    }
  }

  int ordinal = 0;
  Eigen::MatrixXd w_grid(m, 2);
  Eigen::MatrixXd prev(m, 2);
  Eigen::VectorXd a11g, a22g, a21g;

  for (const auto& ch : art.draws.chains) {
    for (std::size_t wi = 0; wi < ch.w_draw_rows.size(); ++wi) {
      const int row = ch.w_draw_rows[wi];
      Rng rng = base.child(0x7000000ull + ordinal);
      for (auto* sink : sinks) sink->begin_draw(ordinal);

      const auto val = [&](int col) { return ch.values(row, col); };

      // Kriging systems with this draw's kernel.
      KrigeSystem sys[2];
      double a11c = 1.0, a22c = 1.0, a21c = 0.0;
      if (univariate) {
        for (int s = 0; s < 2; ++s) {
          const KernelSpec k = KernelSpec::iso(3.0 / val(uix.range[s]));
          sys[s] = krige_system(k, obs_sites, tgt_sites);
        }
      } else {
        const double phi = 3.0 / val(bix.range);
        const KernelSpec k = aniso
            ? KernelSpec::anisotropic(phi, 3.0 / val(bix.range_x))
            : KernelSpec::iso(phi);
        sys[0] = krige_system(k, obs_sites, tgt_sites);
        if (!sv) {
          a11c = val(bix.a11);
          a22c = val(bix.a22);
          a21c = val(bix.a21);
        }
      }

      if (sv) {
        // Conditional draw of each A(s) field at the grid.
        auto krige_field = [&](const std::vector<int>& cols,
                               const std::array<int, 2>& beta_cols,
                               int sigma2_col, bool log_scale) {
          Eigen::VectorXd f(n);
          for (int i = 0; i < n; ++i) {
            f[i] = log_scale ? std::log(val(cols[i])) : val(cols[i]);
          }
          const Eigen::Vector2d b{val(beta_cols[0]), val(beta_cols[1])};
          const double s2 = val(sigma2_col);
          Eigen::VectorXd z(m);
          for (int i = 0; i < m; ++i) z[i] = rng.normal();
          const Eigen::VectorXd noise = field_sys.cond_chol.llt.matrixL() * z;
          Eigen::VectorXd out = z_grid * b + field_sys.weights * (f - z_obs * b) +
                                std::sqrt(s2) * noise;
          if (log_scale) out = out.array().exp();
          return out;
        };
        a11g = krige_field(bix.a11_s, bix.beta_a11, bix.sigma2_a11, true);
        a22g = krige_field(bix.a22_s, bix.beta_a22, bix.sigma2_a22, true);
        a21g = krige_field(bix.a21_s, bix.beta_a21, bix.sigma2_a21, false);
      }

      for (int t : years) {
        const long slice0 = static_cast<long>(t - 2) * n_days;
        Rng yrng = rng.child(0x9000000ull + t);
        // Seed day from the clamped station proportions.
        for (int i = 0; i < m; ++i) {
          for (int s = 0; s < 2; ++s) {
            prev(i, s) = yrng.bernoulli(art.seed_prob(t - 1, s)) ? 1.0 : 0.0;
          }
        }
        ind = prev;
        {
          DaySlice slice{ordinal, t, 0, art.layout.day_label(0), nullptr, &ind};
          for (auto* sink : sinks) sink->on_slice(slice);
        }
        const double trend = probit(1.0 / t);
        for (int d = 1; d <= n_days; ++d) {
          const long sl = slice0 + (d - 1);
          if (univariate) {
            w_grid.col(0) = sys[0].draw(ch.w0[wi].col(sl), yrng);
            w_grid.col(1) = sys[1].draw(ch.w1[wi].col(sl), yrng);
          } else {
            w_grid.col(0) = sys[0].draw(ch.w0[wi].col(sl), yrng);
            w_grid.col(1) = sys[0].draw(ch.w1[wi].col(sl), yrng);
          }
          for (int i = 0; i < m; ++i) {
            const double ld = grid_logdist[i];
            if (univariate) {
              for (int s = 0; s < 2; ++s) {
                const double lag = prev(i, s);
                double eta = val(uix.beta[s][0]) + val(uix.beta[s][1]) * lag +
                             val(uix.beta[s][2]) * ld + val(uix.beta[s][3]) * trend +
                             val(uix.beta[s][4]) * trend * lag +
                             val(uix.beta[s][5]) * trend * ld;
                eta += val(uix.a11[s]) * w_grid(i, s);
                prob(i, s) = clamp_prob(probit_inv(eta));
              }
            } else {
              const double a11 = sv ? a11g[i] : a11c;
              const double a22 = sv ? a22g[i] : a22c;
              const double a21 = sv ? a21g[i] : a21c;
              const double lag_max = prev(i, 0);
              const double lag_min = prev(i, 1);
              for (int s = 0; s < 2; ++s) {
                double eta = val(bix.beta[s][0]) + val(bix.beta[s][1]) * lag_max +
                             val(bix.beta[s][2]) * lag_min + val(bix.beta[s][3]) * ld +
                             val(bix.beta[s][4]) * trend +
                             val(bix.beta[s][5]) * trend * lag_max +
                             val(bix.beta[s][6]) * trend * lag_min +
                             val(bix.beta[s][7]) * trend * ld;
                eta += s == 0 ? a11 * w_grid(i, 0)
                              : a21 * w_grid(i, 0) + a22 * w_grid(i, 1);
                prob(i, s) = clamp_prob(probit_inv(eta));
              }
            }
            for (int s = 0; s < 2; ++s) {
              ind(i, s) = yrng.bernoulli(prob(i, s)) ? 1.0 : 0.0;
            }
          }
          emit_day(ordinal, t, d);
          prev = ind;
        }
      }
      for (auto* sink : sinks) sink->end_draw(ordinal);
      ++ordinal;
    }
  }
}

}  // namespace bivrec
