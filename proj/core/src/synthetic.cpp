#include "bivrec/synthetic.hpp"

#include <cmath>

#include "bivrec/gp.hpp"
#include "bivrec/rng.hpp"

namespace bivrec {

namespace {

// Running weak-record bookkeeping for one (site, signal, day) sequence.
// Values are constructed relative to the running maximum so the extraction
// pass reproduces the committed mark exactly.
struct ValueTrack {
  double running = 0.0;
  bool have = false;
  MarkCode weak_count = 0;

  double emit_record(Rng& rng) {
    running = have ? running + rng.uniform(0.1, 1.0) : 20.0 + rng.uniform(0.0, 1.0);
    have = true;
    weak_count = 1;
    return running;
  }
  // Returns NaN when no previous value exists (any finite value would be a
  // record, so only a missing entry can carry a non-record mark).
  double emit_nonrecord(Rng& rng) {
    if (!have) return DailyTemperatureSeries::kMissing;
    return running - rng.uniform(0.1, 1.0);
  }
  double emit_tie() {
    ++weak_count;
    return running;
  }
  bool can_tie() const { return have; }
  MarkCode tie_mark() const { return weak_count; }
};

struct CellDecision {
  double value = DailyTemperatureSeries::kMissing;
  MarkCode mark = kMarkZero;
  std::uint8_t indicator = 0;  // value used by the model dynamics as lag
};

// Applies missing/tie injection to a model indicator and advances the track.
CellDecision commit(ValueTrack& track, bool model_record, bool is_first_year,
                    double tie_rate, double missing_rate, Rng& rng) {
  CellDecision out;
  if (missing_rate > 0.0 && rng.bernoulli(missing_rate)) {
    out.value = DailyTemperatureSeries::kMissing;
    out.mark = is_first_year ? kMarkOne : kMarkZero;
    out.indicator = is_first_year ? 1 : 0;
    return out;
  }
  if (is_first_year || model_record) {
    out.value = track.emit_record(rng);
    out.mark = kMarkOne;
    out.indicator = 1;
    return out;
  }
  if (tie_rate > 0.0 && track.can_tie() && rng.bernoulli(tie_rate)) {
    out.value = track.emit_tie();
    out.mark = track.tie_mark();
    out.indicator = 0;  // the dynamics had decided on a non-record
    return out;
  }
  out.value = track.emit_nonrecord(rng);
  out.mark = kMarkZero;
  out.indicator = 0;
  return out;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_sites < 2) throw ConfigError("generate_synthetic: n_sites must be >= 2");
  if (spec.n_years < 3) throw ConfigError("generate_synthetic: T must be >= 3");
  if (spec.n_days < 1 || spec.n_days > kSummerDays) {
    throw ConfigError("generate_synthetic: n_days must lie in [1, 92]");
  }
  if (spec.tie_rate < 0.0 || spec.tie_rate >= 1.0 || spec.missing_rate < 0.0 ||
      spec.missing_rate >= 1.0) {
    throw ConfigError("generate_synthetic: rates must lie in [0, 1)");
  }

  Rng rng(seed);
  SyntheticData out;
  out.params = spec.model;

  SeriesLayout layout;
  layout.first_year = spec.first_year;
  layout.n_years = spec.n_years;
  layout.n_days = spec.n_days;

  const int n = spec.n_sites;
  out.stations.resize(n);
  std::vector<GpSite> sites(n);
  for (int i = 0; i < n; ++i) {
    auto& st = out.stations[i];
    st.layout = layout;
    st.meta.id = "S" + std::to_string(100 + i);
    st.meta.x_km = rng.uniform(0.0, spec.domain_km);
    st.meta.y_km = rng.uniform(0.0, spec.domain_km);
    st.meta.dist_coast_km = st.meta.x_km;  // west edge plays the coast
    st.meta.sx = 1.5 + 2.0 * st.meta.y_km / spec.domain_km +
                 0.5 * st.meta.x_km / spec.domain_km;
    st.allocate();
    sites[i] = GpSite{st.meta.x_km, st.meta.y_km, std::log(st.meta.sx)};
  }

  RecordPanel truth;
  truth.layout = layout;
  for (int i = 0; i < n; ++i) truth.site_ids.push_back(out.stations[i].meta.id);
  for (int s = 0; s < 2; ++s) {
    truth.marks[s].assign(static_cast<long>(n) * layout.cells_per_site(), kMarkZero);
  }

  const int dpy = layout.days_per_year();
  std::vector<ValueTrack> tracks(static_cast<std::size_t>(n) * 2 * dpy);
  auto track_at = [&](int site, int sig, int d) -> ValueTrack& {
    return tracks[(static_cast<std::size_t>(site) * 2 + sig) * dpy + d];
  };

  if (spec.generator == GeneratorKind::Stationary) {
    // i.i.d. continuous values; marks re-derived by extraction afterwards.
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < 2; ++s) {
        for (int d = 0; d < dpy; ++d) {
          for (int t = 0; t < layout.n_years; ++t) {
            double val = rng.normal(20.0, 5.0);
            if (spec.missing_rate > 0.0 && rng.bernoulli(spec.missing_rate)) {
              val = DailyTemperatureSeries::kMissing;
            } else if (spec.tie_rate > 0.0 && t > 0 && rng.bernoulli(spec.tie_rate)) {
              // duplicate the running weak maximum of the earlier years
              double best = -std::numeric_limits<double>::infinity();
              bool found = false;
              for (int u = 0; u < t; ++u) {
                const double prev = out.stations[i].values[s][layout.cell(u, d)];
                if (std::isfinite(prev) && prev > best) {
                  best = prev;
                  found = true;
                }
              }
              if (found) val = best;
            }
            out.stations[i].values[s][layout.cell(t, d)] = val;
          }
        }
      }
    }
    out.truth_panel = extract_indicators(out.stations);
    return out;
  }

  // ---- Model generator: dynamic in day, latent GP day fields ----
  const ModelParams& mp = spec.model;
  KernelSpec kernel = mp.aniso ? KernelSpec::anisotropic(mp.phi, mp.phi_x)
                               : KernelSpec::iso(mp.phi);
  const CholeskyResult cfac = chol_with_jitter(cov_matrix(kernel, sites));

  Eigen::VectorXd a11v = Eigen::VectorXd::Constant(n, mp.coreg.a11);
  Eigen::VectorXd a22v = Eigen::VectorXd::Constant(n, mp.coreg.a22);
  Eigen::VectorXd a21v = Eigen::VectorXd::Constant(n, mp.coreg.a21);
  if (mp.spatially_varying) {
    Eigen::MatrixXd z(n, 2);
    for (int i = 0; i < n; ++i) {
      z(i, 0) = 1.0;
      z(i, 1) = std::log1p(out.stations[i].meta.dist_coast_km);
    }
    const CholeskyResult afac =
        chol_with_jitter(cov_matrix(KernelSpec::iso(mp.phi_a), sites));
    auto draw_field = [&](const Eigen::Vector2d& beta_a, double sigma2) {
      Eigen::VectorXd noise(n);
      for (int i = 0; i < n; ++i) noise[i] = rng.normal();
      const Eigen::VectorXd corr = afac.llt.matrixL() * noise;
      return (z * beta_a + std::sqrt(sigma2) * corr).eval();
    };
    a11v = draw_field(mp.beta_a11, mp.sigma2_a11).array().exp();
    a22v = draw_field(mp.beta_a22, mp.sigma2_a22).array().exp();
    a21v = draw_field(mp.beta_a21, mp.sigma2_a21);
    out.a11_s = a11v;
    out.a22_s = a22v;
    out.a21_s = a21v;
  }

  std::vector<std::uint8_t> prev_ind(static_cast<std::size_t>(n) * 2, 0);
  std::vector<std::uint8_t> cur_ind(prev_ind.size());
  Eigen::VectorXd zn(n), w1(n), w2(n);

  for (int t = 0; t < layout.n_years; ++t) {
    const bool first = t == 0;
    // Seed day: Bernoulli(1/t) outside year one; value bookkeeping matches.
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < 2; ++s) {
        const bool rec = first || rng.bernoulli(1.0 / (t + 1));
        CellDecision cd = commit(track_at(i, s, 0), rec, first, spec.tie_rate,
                                 spec.missing_rate, rng);
        out.stations[i].values[s][layout.cell(t, 0)] = cd.value;
        truth.marks[s][truth.index(i, t, 0)] = cd.mark;
        prev_ind[static_cast<std::size_t>(i) * 2 + s] = cd.indicator;
      }
    }
    for (int d = 1; d < dpy; ++d) {
      if (!first) {
        for (Eigen::Index i = 0; i < n; ++i) zn[i] = rng.normal();
        w1 = cfac.llt.matrixL() * zn;
        for (Eigen::Index i = 0; i < n; ++i) zn[i] = rng.normal();
        w2 = cfac.llt.matrixL() * zn;
      }
      for (int i = 0; i < n; ++i) {
        bool rec[2] = {true, true};
        if (!first) {
          const DesignRow row = build_design_row(
              t + 1, prev_ind[static_cast<std::size_t>(i) * 2],
              prev_ind[static_cast<std::size_t>(i) * 2 + 1],
              out.stations[i].meta.dist_coast_km);
          const Eigen::Vector2d v{a11v[i] * w1[i],
                                  a21v[i] * w1[i] + a22v[i] * w2[i]};
          const Eigen::Vector2d eta = linear_predictor(mp.coef, row, v);
          rec[0] = eta[0] + rng.normal() > 0.0;
          rec[1] = eta[1] + rng.normal() > 0.0;
        }
        for (int s = 0; s < 2; ++s) {
          CellDecision cd = commit(track_at(i, s, d), rec[s], first,
                                   spec.tie_rate, spec.missing_rate, rng);
          out.stations[i].values[s][layout.cell(t, d)] = cd.value;
          truth.marks[s][truth.index(i, t, d)] = cd.mark;
          cur_ind[static_cast<std::size_t>(i) * 2 + s] = cd.indicator;
        }
      }
      prev_ind = cur_ind;
    }
  }
  out.truth_panel = std::move(truth);
  return out;
}

}  // namespace bivrec
