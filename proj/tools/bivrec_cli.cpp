// Command-line front end: extract record panels from station CSVs, simulate
// synthetic data, fit model variants M0-M5, predict over grids, summarize
// posterior-predictive surfaces, cross-validate, and report chain
// diagnostics. Every subcommand is deterministic under a fixed seed.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "bivrec/csv.hpp"
#include "bivrec/io.hpp"
#include "bivrec/metrics.hpp"
#include "bivrec/predict.hpp"
#include "bivrec/records.hpp"
#include "bivrec/summaries.hpp"
#include "bivrec/synthetic.hpp"

namespace fs = std::filesystem;
using namespace bivrec;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_set = false;
};

Config load_config(const CommonOpts& c) {
  Config cfg;
  if (!c.config_path.empty()) cfg = Config::from_file(c.config_path);
  cfg.apply_environment();
  if (c.seed_set) cfg.set("seed", std::to_string(c.seed));
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "key=value configuration file");
  cmd->add_option("--seed", c.seed, "random seed")->each([&](const std::string&) {
    c.seed_set = true;
  });
}

void ensure_run_dirs(const std::string& out) {
  for (const char* sub : {"panel", "draws", "surfaces", "reports", "data", "truth"}) {
    fs::create_directories(fs::path(out) / sub);
  }
}

std::pair<int, int> parse_range(const std::string& s, const char* what) {
  const auto pos = s.find(':');
  if (pos == std::string::npos) {
    const int v = static_cast<int>(parse_long(s, what));
    return {v, v};
  }
  return {static_cast<int>(parse_long(s.substr(0, pos), what)),
          static_cast<int>(parse_long(s.substr(pos + 1), what))};
}

// Raw predictive dump, one row per (draw, day, cell).
class RawDumpSink : public PredictiveSink {
 public:
  RawDumpSink(const std::string& path, const GridSpec& grid,
              const std::string& meta)
      : grid_(&grid),
        writer_(path, meta, "draw,t,day,cell_id,p_max,p_min,i_max,i_min") {}

  void on_slice(const DaySlice& s) override {
    for (int i = 0; i < grid_->size(); ++i) {
      writer_.write_row(
          {std::to_string(s.draw_ordinal), std::to_string(s.t),
           std::to_string(s.day_label), grid_->cells[i].id,
           s.prob ? fmt_short((*s.prob)(i, 0)) : "",
           s.prob ? fmt_short((*s.prob)(i, 1)) : "",
           fmt_short((*s.indicator)(i, 0)), fmt_short((*s.indicator)(i, 1))});
    }
  }
  void close() { writer_.close(); }

 private:
  const GridSpec* grid_;
  CsvWriter writer_;
};

// ---------------------------------------------------------------------------

int cmd_extract(const std::vector<std::string>& files, const std::string& data_dir,
                const std::string& out, int first_year, int last_year, int days,
                const CommonOpts& copts) {
  Config cfg = load_config(copts);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::string meta = meta_comment(cfg, seed);

  std::vector<std::string> paths = files;
  if (!data_dir.empty()) {
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(data_dir)) {
      if (e.path().extension() == ".csv") found.push_back(e.path().string());
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  IngestResult ing = ingest(paths, first_year, last_year, days);
  RecordPanel panel = extract_indicators(ing.stations);

  ensure_run_dirs(out);
  write_panel_csv(out + "/panel/panel.csv", panel, meta);
  std::vector<StationMeta> metas;
  for (const auto& s : ing.stations) metas.push_back(s.meta);
  write_stations_csv(out + "/panel/stations.csv", metas, meta);

  {
    CsvWriter w(out + "/reports/ingest_report.csv", meta,
                "site_id,signal,n_missing,fraction");
    for (const auto& r : ing.report) {
      w.write_row({r.site_id, r.signal, std::to_string(r.n_missing),
                   fmt_short(r.fraction)});
    }
    w.close();
  }
  {
    CsvWriter w(out + "/reports/eda_rates.csv", meta,
                "t,year,signal,empirical_rate,t_times_rate");
    for (int t = 1; t <= panel.layout.n_years; ++t) {
      for (Signal sig : {Signal::Max, Signal::Min}) {
        const double p = empirical_rate(panel, sig, t);
        w.write_row({std::to_string(t),
                     std::to_string(panel.layout.first_year + t - 1),
                     signal_name(sig), fmt_short(p), fmt_short(t * p)});
      }
    }
    w.close();
  }
  {
    CsvWriter w(out + "/reports/eda_lor.csv", meta, "t,year,series,lor");
    for (int t = 1; t <= panel.layout.n_years; ++t) {
      const std::string year = std::to_string(panel.layout.first_year + t - 1);
      w.write_row({std::to_string(t), year, "xn",
                   fmt_short(log_odds_ratio(concurrence_counts(panel, t)))});
      const struct {
        const char* name;
        Signal resp, cond;
      } combos[] = {{"x_given_xprev", Signal::Max, Signal::Max},
                    {"n_given_nprev", Signal::Min, Signal::Min},
                    {"n_given_xprev", Signal::Min, Signal::Max},
                    {"x_given_nprev", Signal::Max, Signal::Min}};
      for (const auto& c : combos) {
        w.write_row({std::to_string(t), year, c.name,
                     fmt_short(log_odds_ratio(
                         persistence_counts(panel, c.resp, c.cond, t)))});
      }
    }
    w.close();
  }
  std::cout << "extracted " << panel.n_sites() << " stations, T="
            << panel.layout.n_years << ", days=" << panel.layout.n_days << "\n";
  return 0;
}

int cmd_simulate(const std::string& out, const std::string& generator,
                 int sites, int years, int days, double tie_rate,
                 double missing_rate, const std::string& variant_like,
                 const CommonOpts& copts) {
  Config cfg = load_config(copts);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::string meta = meta_comment(cfg, seed);

  SyntheticSpec spec;
  spec.n_sites = sites;
  spec.n_years = years;
  spec.n_days = days;
  spec.tie_rate = tie_rate;
  spec.missing_rate = missing_rate;
  spec.generator = generator == "stationary" ? GeneratorKind::Stationary
                                             : GeneratorKind::Model;
  if (generator != "stationary" && generator != "model") {
    throw ConfigError("generator must be 'stationary' or 'model'");
  }
  // Plausible default coefficient block; overridable through config keys.
  spec.model.coef << -0.5, 0.8, 0.3, -0.05, 0.9, -0.15, 0.1, 0.12,
                     -1.0, 0.5, 0.7, 0.02, 0.75, 0.05, -0.12, 0.06;
  spec.model.coreg = CoregConstant{1.3, 0.9, 0.6};
  spec.model.phi = 3.0 / cfg.get_double("truth.range_km", 150.0);
  const VariantSpec vs = VariantSpec::parse(variant_like);
  spec.model.aniso = vs.anisotropic();
  spec.model.spatially_varying = vs.spatially_varying();
  if (spec.model.aniso) {
    spec.model.phi_x = 3.0 / cfg.get_double("truth.range_x", 1.0);
  }
  for (int s = 0; s < 2; ++s) {
    for (int j = 0; j < kBivariateDesignDim; ++j) {
      const std::string key = std::string("truth.beta_") +
                              (s == 0 ? "max" : "min") + std::to_string(j);
      spec.model.coef(s, j) = cfg.get_double(key, spec.model.coef(s, j));
    }
  }
  spec.model.coreg.a11 = cfg.get_double("truth.a11", spec.model.coreg.a11);
  spec.model.coreg.a22 = cfg.get_double("truth.a22", spec.model.coreg.a22);
  spec.model.coreg.a21 = cfg.get_double("truth.a21", spec.model.coreg.a21);

  SyntheticData data = generate_synthetic(spec, seed);
  ensure_run_dirs(out);
  for (const auto& st : data.stations) {
    write_station_csv(out + "/data/" + st.meta.id + ".csv", st, meta);
  }
  write_panel_csv(out + "/truth/panel.csv", data.truth_panel, meta);
  {
    CsvWriter w(out + "/truth/params.csv", meta, "parameter,value");
    if (spec.generator == GeneratorKind::Model) {
      for (int s = 0; s < 2; ++s) {
        for (int j = 0; j < kBivariateDesignDim; ++j) {
          w.write_row({std::string("beta_") + (s == 0 ? "max" : "min") + "[" +
                           std::to_string(j) + "]",
                       fmt_full(spec.model.coef(s, j))});
        }
      }
      w.write_row({"a11", fmt_full(spec.model.coreg.a11)});
      w.write_row({"a22", fmt_full(spec.model.coreg.a22)});
      w.write_row({"a21", fmt_full(spec.model.coreg.a21)});
      w.write_row({"range_km", fmt_full(3.0 / spec.model.phi)});
      if (spec.model.aniso) {
        w.write_row({"range_x", fmt_full(3.0 / spec.model.phi_x)});
      }
    } else {
      w.write_row({"generator", "stationary"});
    }
    w.close();
  }
  std::cout << "simulated " << sites << " stations under " << generator << "\n";
  return 0;
}

FitArtifacts build_artifacts(const RecordPanel& panel,
                             const std::vector<StationMeta>& stations,
                             const SamplerConfig& sc) {
  FitData fd = prepare_fit_data(panel, stations, sc.variant.anisotropic());
  FitArtifacts art;
  art.variant = sc.variant;
  art.layout = panel.layout;
  art.stations = fd.stations;
  art.station_covariate = fd.covariate_x;
  art.phi_a = sc.prior.phi_a;
  art.seed_prob = seed_day_probabilities(panel);
  art.draws = run_chains(fd, sc);
  if (!sc.variant.stationary()) {
    // Posterior-mean spatial decay feeds the deterministic covariate kriging.
    const std::string key =
        sc.variant.id == Variant::M1 ? "range_km_max" : "range_km";
    double mean_phi = 0.0;
    long count = 0;
    const int j = art.draws.param_index(key);
    for (const auto& ch : art.draws.chains) {
      for (Eigen::Index r = 0; r < ch.values.rows(); ++r) {
        mean_phi += 3.0 / ch.values(r, j);
        ++count;
      }
    }
    art.covariate_krige_phi = mean_phi / count;
  }
  return art;
}

int cmd_fit(const std::string& panel_dir, const std::string& out,
            const std::string& variant, const CommonOpts& copts,
            long sweeps_flag, int thin_flag, int chains_flag, int threads_flag,
            int wstore_flag) {
  Config cfg = load_config(copts);
  if (!variant.empty()) cfg.set("variant", variant);
  if (sweeps_flag > 0) cfg.set("sweeps", std::to_string(sweeps_flag));
  if (thin_flag > 0) cfg.set("thin_to", std::to_string(thin_flag));
  if (chains_flag > 0) cfg.set("chains", std::to_string(chains_flag));
  if (threads_flag > 0) cfg.set("threads", std::to_string(threads_flag));
  if (wstore_flag > 0) cfg.set("w_store", std::to_string(wstore_flag));
  SamplerConfig sc = cfg.sampler_config();

  RecordPanel panel = read_panel_csv(panel_dir + "/panel.csv");
  std::vector<StationMeta> stations =
      read_stations_csv(panel_dir + "/stations.csv");

  FitArtifacts art = build_artifacts(panel, stations, sc);
  ensure_run_dirs(out);
  write_fit_artifacts(out + "/draws", art, cfg, sc.seed, sc);
  std::cout << "fit " << sc.variant.name() << ": "
            << (sc.variant.stationary()
                    ? std::string("analytic stationary reference")
                    : std::to_string(art.draws.chains.size()) + " chains x " +
                          std::to_string(sc.thin_to) + " draws")
            << "\n";
  return 0;
}

int cmd_predict(const std::string& fit_dir, const std::string& grid_path,
                const std::string& out, const std::string& years_arg,
                const std::string& days_arg, bool dump_raw, int m0_draws,
                const CommonOpts& copts) {
  Config cfg = load_config(copts);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::string meta = meta_comment(cfg, seed);

  FitArtifacts art = load_fit_artifacts(fit_dir);
  if (m0_draws > 0) art.m0_draws = m0_draws;
  GridSpec grid = read_grid_csv(grid_path);

  auto [t1, t2] = parse_range(
      years_arg.empty() ? std::to_string(art.layout.n_years) : years_arg,
      "years");
  std::vector<int> years;
  for (int t = t1; t <= t2; ++t) years.push_back(t);
  auto [d1, d2] = parse_range(
      days_arg.empty() ? "1:" + std::to_string(art.layout.n_days) : days_arg,
      "days");
  if (d1 < 1 || d2 > art.layout.n_days || d2 < d1) {
    throw ConfigError("day range outside the study window");
  }

  const int n_draws = predictive_draw_count(art);
  std::vector<std::pair<int, int>> keys;
  for (int t : years) {
    for (int d = d1; d <= d2; ++d) keys.push_back({t, d});
  }
  ProbabilitySurfaceAccumulator probs(grid, n_draws, keys);
  std::vector<PredictiveSink*> sinks{&probs};

  ensure_run_dirs(out);
  std::unique_ptr<RawDumpSink> raw;
  if (dump_raw) {
    raw = std::make_unique<RawDumpSink>(out + "/surfaces/raw_draws.csv", grid, meta);
    sinks.push_back(raw.get());
  }
  simulate_posterior_predictive(art, grid, years, seed, sinks);
  if (raw) raw->close();
  write_surface_csv(out + "/surfaces/probability_surfaces.csv", meta,
                    probs.surfaces());
  std::cout << "predicted " << n_draws << " draws over " << grid.size()
            << " cells\n";
  return 0;
}

int cmd_summarize(const std::string& fit_dir, const std::string& grid_path,
                  const std::string& out, const std::string& window_arg,
                  int persistence_year, int m0_draws, const CommonOpts& copts) {
  Config cfg = load_config(copts);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::string meta = meta_comment(cfg, seed);

  FitArtifacts art = load_fit_artifacts(fit_dir);
  if (m0_draws > 0) art.m0_draws = m0_draws;
  GridSpec grid = read_grid_csv(grid_path);
  const int T = art.layout.n_years;
  const int n_days = art.layout.n_days;

  auto [t1, t2] = parse_range(
      window_arg.empty()
          ? std::to_string(std::max(2, T - 9)) + ":" + std::to_string(T)
          : window_arg,
      "window");
  if (t1 < 2 || t2 > T || t2 < t1) throw ConfigError("bad summary window");

  std::vector<int> years;
  for (int t = 2; t <= T; ++t) years.push_back(t);
  const int n_draws = predictive_draw_count(art);

  CountAccumulator n_max(grid, n_draws, EventKind::Max, t1, t2, 1, n_days);
  CountAccumulator n_min(grid, n_draws, EventKind::Min, t1, t2, 1, n_days);
  CountAccumulator n_joint(grid, n_draws, EventKind::Joint, t1, t2, 1, n_days);
  const int len = t2 - t1 + 1;
  const bool have_base = t1 - len >= 2;
  std::unique_ptr<CountAccumulator> joint_base;
  if (have_base) {
    joint_base = std::make_unique<CountAccumulator>(
        grid, n_draws, EventKind::Joint, t1 - len, t1 - 1, 1, n_days);
  }
  ErsAccumulator ers_max(grid, n_draws, EventKind::Max, years, n_days);
  ErsAccumulator ers_min(grid, n_draws, EventKind::Min, years, n_days);
  ErsAccumulator ers_joint(grid, n_draws, EventKind::Joint, years, n_days);
  JaccardAccumulator jac(grid, n_draws, years, t1, t2, 1, n_days);
  PersistenceAccumulator persist(grid, n_draws, years);

  std::vector<PredictiveSink*> sinks{&n_max,    &n_min, &n_joint, &ers_max,
                                     &ers_min,  &ers_joint, &jac,  &persist};
  if (joint_base) sinks.push_back(joint_base.get());
  simulate_posterior_predictive(art, grid, years, seed, sinks);

  ensure_run_dirs(out);
  const std::string win =
      "_" + std::to_string(t1) + "_" + std::to_string(t2);
  std::vector<SurfaceRow> surf;
  auto append = [&](std::vector<SurfaceRow> rows) {
    surf.insert(surf.end(), rows.begin(), rows.end());
  };
  append(n_max.n_surface("N_max" + win));
  append(n_min.n_surface("N_min" + win));
  append(n_joint.n_surface("N_joint" + win));
  append(n_max.r_surface("R_max" + win));
  append(n_min.r_surface("R_min" + win));
  append(nmax_vs_nmin_surface(grid, n_max, n_min, "P_Nmax_gt_Nmin" + win));
  if (joint_base) {
    append(joint_change_surface(grid, n_joint, *joint_base,
                                "P_joint_increase" + win));
  }
  append(jac.surface("jaccard" + win));
  const int py = persistence_year > 0 ? persistence_year : T;
  append(persist.surface(py, "persistence_ratio_t" + std::to_string(py)));
  write_surface_csv(out + "/surfaces/summary_surfaces.csv", meta, surf);

  std::vector<TimeSeriesRow> series;
  auto append_ts = [&](std::vector<TimeSeriesRow> rows) {
    series.insert(series.end(), rows.begin(), rows.end());
  };
  append_ts(ers_max.scaled_yearly_series("t_ers_max"));
  append_ts(ers_min.scaled_yearly_series("t_ers_min"));
  append_ts(ers_joint.scaled_yearly_series("t_ers_joint"));
  append_ts(jac.yearly_block_series("jaccard_block"));
  append_ts(persist.yearly_block_series("persistence_ratio_block"));
  write_time_series_csv(out + "/reports/summary_series.csv", meta, series);

  write_calendar_csv(out + "/reports/calendar_ers_max.csv", meta,
                     ers_max.calendar(art.layout.first_year));
  write_calendar_csv(out + "/reports/calendar_ers_min.csv", meta,
                     ers_min.calendar(art.layout.first_year));
  write_calendar_csv(out + "/reports/calendar_ers_joint.csv", meta,
                     ers_joint.calendar(art.layout.first_year));
  std::cout << "summarized " << n_draws << " draws over " << grid.size()
            << " cells\n";
  return 0;
}

int cmd_cv(const std::string& panel_dir, const std::string& out,
           const std::string& variants_arg, int groups, const CommonOpts& copts) {
  Config cfg = load_config(copts);
  SamplerConfig sc = cfg.sampler_config();
  const std::string meta = meta_comment(cfg, sc.seed);

  RecordPanel panel = read_panel_csv(panel_dir + "/panel.csv");
  std::vector<StationMeta> stations =
      read_stations_csv(panel_dir + "/stations.csv");

  std::vector<std::string> variant_names;
  std::string cur;
  for (char c : variants_arg + ",") {
    if (c == ',') {
      if (!cur.empty()) variant_names.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (variant_names.empty()) throw ConfigError("cv: no variants given");

  const int n_groups = groups > 0
                           ? groups
                           : static_cast<int>(cfg.get_long("cv.groups", 10));
  FoldPlan plan = FoldPlan::seeded(panel.n_sites(), n_groups,
                                   Rng::mix(sc.seed, 0xF01Dull));
  CvOptions opts;
  opts.t_split = static_cast<int>(cfg.get_long("cv.t_split", 0));

  std::vector<CvRow> all;
  for (const auto& vn : variant_names) {
    SamplerConfig vc = sc;
    vc.variant = VariantSpec::parse(vn);
    auto rows = run_cv(panel, stations, vc, plan, opts);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  ensure_run_dirs(out);
  write_cv_report_csv(out + "/reports/cv_report.csv", all, meta);
  std::cout << "cross-validated " << variant_names.size() << " variants over "
            << n_groups << " folds\n";
  return 0;
}

int cmd_diagnostics(const std::string& fit_dir, const std::string& out,
                    const CommonOpts& copts) {
  Config cfg = load_config(copts);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::string meta = meta_comment(cfg, seed);

  FitArtifacts art = load_fit_artifacts(fit_dir);
  if (art.variant.stationary()) {
    throw ConfigError("diagnostics: the stationary variant has no chains");
  }
  auto rows = diagnostics(art.draws);
  ensure_run_dirs(out);
  CsvWriter w(out + "/reports/diagnostics.csv", meta, "parameter,rhat,ess");
  for (const auto& r : rows) {
    w.write_row({r.param, fmt_short(r.rhat), fmt_short(r.ess)});
  }
  w.close();
  std::cout << "diagnostics for " << rows.size() << " parameters\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate spatio-temporal record-breaking models"};
  app.require_subcommand(1);

  // extract
  auto* ex = app.add_subcommand("extract", "Build record panels from station CSVs");
  std::vector<std::string> ex_files;
  std::string ex_dir, ex_out;
  int ex_first = 0, ex_last = 0, ex_days = kSummerDays;
  CommonOpts ex_c;
  ex->add_option("--data", ex_files, "station CSV files");
  ex->add_option("--data-dir", ex_dir, "directory of station CSVs");
  ex->add_option("--out", ex_out, "run directory")->required();
  ex->add_option("--first-year", ex_first, "first study year (default: data)");
  ex->add_option("--last-year", ex_last, "last study year (default: data)");
  ex->add_option("--days", ex_days, "summer days in the window (<= 92)");
  add_common(ex, ex_c);

  // simulate
  auto* si = app.add_subcommand("simulate", "Generate synthetic station data");
  std::string si_out, si_gen = "model", si_variant = "M2";
  int si_sites = 8, si_years = 20, si_days = 30;
  double si_tie = 0.0, si_missing = 0.0;
  CommonOpts si_c;
  si->add_option("--out", si_out, "run directory")->required();
  si->add_option("--generator", si_gen, "stationary | model");
  si->add_option("--sites", si_sites, "number of stations");
  si->add_option("--years", si_years, "number of years T");
  si->add_option("--days", si_days, "summer days (<= 92)");
  si->add_option("--tie-rate", si_tie, "duplicate-value injection rate");
  si->add_option("--missing-rate", si_missing, "missing-value injection rate");
  si->add_option("--model-variant", si_variant,
                 "variant whose structure the generator mirrors");
  add_common(si, si_c);

  // fit
  auto* fi = app.add_subcommand("fit", "Fit a model variant by MCMC");
  std::string fi_panel, fi_out, fi_variant;
  long fi_sweeps = 0;
  int fi_thin = 0, fi_chains = 0, fi_threads = 0, fi_wstore = 0;
  CommonOpts fi_c;
  fi->add_option("--panel-dir", fi_panel, "directory with panel.csv + stations.csv")
      ->required();
  fi->add_option("--out", fi_out, "run directory")->required();
  fi->add_option("--variant", fi_variant, "M0..M5");
  fi->add_option("--sweeps", fi_sweeps, "MCMC sweeps per chain");
  fi->add_option("--thin", fi_thin, "retained draws per chain");
  fi->add_option("--chains", fi_chains, "number of chains");
  fi->add_option("--threads", fi_threads, "worker cap for parallel chains");
  fi->add_option("--w-store", fi_wstore, "archived day-field draws per chain");
  add_common(fi, fi_c);

  // predict
  auto* pr = app.add_subcommand("predict", "Posterior-predictive surfaces on a grid");
  std::string pr_fit, pr_grid, pr_out, pr_years, pr_days;
  bool pr_raw = false;
  int pr_m0 = 0;
  CommonOpts pr_c;
  pr->add_option("--fit-dir", pr_fit, "directory with fit artifacts")->required();
  pr->add_option("--grid", pr_grid, "grid CSV")->required();
  pr->add_option("--out", pr_out, "run directory")->required();
  pr->add_option("--years", pr_years, "year range t1:t2 (1-based)");
  pr->add_option("--days", pr_days, "day range d1:d2 within the window");
  pr->add_flag("--dump-raw", pr_raw, "also write raw predictive draws");
  pr->add_option("--m0-draws", pr_m0, "predictive replicates for M0");
  add_common(pr, pr_c);

  // summarize
  auto* su = app.add_subcommand("summarize", "Model-based summary statistics");
  std::string su_fit, su_grid, su_out, su_window;
  int su_py = 0, su_m0 = 0;
  CommonOpts su_c;
  su->add_option("--fit-dir", su_fit, "directory with fit artifacts")->required();
  su->add_option("--grid", su_grid, "grid CSV")->required();
  su->add_option("--out", su_out, "run directory")->required();
  su->add_option("--window", su_window, "year window t1:t2 (default last decade)");
  su->add_option("--persistence-year", su_py, "year for the persistence surface");
  su->add_option("--m0-draws", su_m0, "predictive replicates for M0");
  add_common(su, su_c);

  // cv
  auto* cv = app.add_subcommand("cv", "K-fold cross-validation comparison");
  std::string cv_panel, cv_out, cv_variants = "M0,M2";
  int cv_groups = 0;
  CommonOpts cv_c;
  cv->add_option("--panel-dir", cv_panel, "directory with panel.csv + stations.csv")
      ->required();
  cv->add_option("--out", cv_out, "run directory")->required();
  cv->add_option("--variants", cv_variants, "comma-separated variant list");
  cv->add_option("--groups", cv_groups, "number of folds");
  add_common(cv, cv_c);

  // diagnostics
  auto* dg = app.add_subcommand("diagnostics", "Split R-hat and ESS per parameter");
  std::string dg_fit, dg_out;
  CommonOpts dg_c;
  dg->add_option("--fit-dir", dg_fit, "directory with fit artifacts")->required();
  dg->add_option("--out", dg_out, "run directory")->required();
  add_common(dg, dg_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (ex->parsed()) {
      return cmd_extract(ex_files, ex_dir, ex_out, ex_first, ex_last, ex_days, ex_c);
    }
    if (si->parsed()) {
      return cmd_simulate(si_out, si_gen, si_sites, si_years, si_days, si_tie,
                          si_missing, si_variant, si_c);
    }
    if (fi->parsed()) {
      return cmd_fit(fi_panel, fi_out, fi_variant, fi_c, fi_sweeps, fi_thin,
                     fi_chains, fi_threads, fi_wstore);
    }
    if (pr->parsed()) {
      return cmd_predict(pr_fit, pr_grid, pr_out, pr_years, pr_days, pr_raw,
                         pr_m0, pr_c);
    }
    if (su->parsed()) {
      return cmd_summarize(su_fit, su_grid, su_out, su_window, su_py, su_m0, su_c);
    }
    if (cv->parsed()) {
      return cmd_cv(cv_panel, cv_out, cv_variants, cv_groups, cv_c);
    }
    if (dg->parsed()) {
      return cmd_diagnostics(dg_fit, dg_out, dg_c);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
