#include "bivrec/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bivrec/csv.hpp"

extern char** environ;

namespace bivrec {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string env_key(const std::string& prefix, const std::string& key) {
  std::string out = prefix;
  for (char c : key) {
    if (c == '.') {
      out += '_';
    } else {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    cfg.kv_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

void Config::apply_environment(const std::string& prefix) {
  // Every known key may be overridden; unknown prefixed variables are also
  // picked up so prior overrides need no pre-registration.
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry = *e;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    if (name.rfind(prefix, 0) != 0) continue;
    std::string key;
    for (std::size_t i = prefix.size(); i < name.size(); ++i) {
      key += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
    }
    // Dots in keys come back from underscores for the prior.* family.
    if (key.rfind("prior_", 0) == 0) key = "prior." + key.substr(6);
    if (key.rfind("cv_", 0) == 0) key = "cv." + key.substr(3);
    kv_[key] = entry.substr(eq + 1);
  }
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key, double dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return parse_double(it->second, "config key " + key);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

long Config::get_long(const std::string& key, long dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return parse_long(it->second, "config key " + key);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    throw ConfigError("bad unsigned value for config key " + key);
  }
  return v;
}

std::string Config::normalized() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string Config::hash_hex() const {
  const std::string s = normalized();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SamplerConfig Config::sampler_config() const {
  SamplerConfig sc;
  sc.variant = VariantSpec::parse(get_string("variant", "M2"));
  sc.sweeps = get_long("sweeps", 20000);
  sc.burn_in_fraction = get_double("burn_in_fraction", 1.0 / 3.0);
  sc.thin_to = static_cast<int>(get_long("thin_to", 500));
  sc.n_chains = static_cast<int>(get_long("chains", 2));
  sc.seed = get_u64("seed", 1);
  sc.w_store = static_cast<int>(get_long("w_store", 200));
  sc.adapt_batch = static_cast<int>(get_long("adapt_batch", 25));
  sc.adapt_target = get_double("adapt_target", 0.35);
  sc.threads = static_cast<int>(get_long("threads", 1));
  sc.prior.beta_sd = get_double("prior.beta_sd", 10.0);
  sc.prior.diag_halfnormal_sd = get_double("prior.diag_sd", 5.0);
  sc.prior.a21_sd = get_double("prior.a21_sd", 10.0);
  sc.prior.range_shape = get_double("prior.range_shape", 2.0);
  sc.prior.range_scale = get_double("prior.range_scale", 300.0);
  sc.prior.range_x_shape = get_double("prior.range_x_shape", 2.0);
  sc.prior.range_x_scale = get_double("prior.range_x_scale", 0.0);
  sc.prior.beta_a_sd = get_double("prior.beta_a_sd", 10.0);
  sc.prior.sigma2_a_shape = get_double("prior.sigma2_a_shape", 0.1);
  sc.prior.sigma2_a_scale = get_double("prior.sigma2_a_scale", 0.1);
  sc.prior.phi_a = get_double("prior.phi_a", 1.0 / 300.0);
  if (sc.burn_in_fraction <= 0.0 || sc.burn_in_fraction >= 1.0) {
    throw ConfigError("burn_in_fraction must lie in (0,1)");
  }
  return sc;
}

std::string meta_comment(const Config& config, std::uint64_t seed) {
  return std::string("bivrec ") + kArtifactVersion + " config=" +
         config.hash_hex() + " seed=" + std::to_string(seed);
}

// ---------------------------------------------------------------------------
// Station ingestion
// ---------------------------------------------------------------------------

namespace {

double parse_temp_field(const std::string& s, const std::string& ctx) {
  if (s.empty()) return DailyTemperatureSeries::kMissing;
  return parse_double(s, ctx);
}

struct RawStation {
  StationMeta meta;
  std::vector<std::pair<Date, std::array<double, 2>>> rows;
};

RawStation read_station_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  RawStation st;
  std::string line;
  int stage = 0;  // 0: meta header, 1: meta row, 2: data header, 3: data
  Date last_date{0, 0, 0};
  bool have_last = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(lineno);
    switch (stage) {
      case 0:
        if (fields != std::vector<std::string>{"site_id", "x_km", "y_km",
                                               "dist_coast_km", "sx"}) {
          throw DataError(ctx + ": expected station header "
                                "'site_id,x_km,y_km,dist_coast_km,sx'");
        }
        stage = 1;
        break;
      case 1:
        if (fields.size() != 5) throw DataError(ctx + ": bad station row");
        st.meta.id = fields[0];
        st.meta.x_km = parse_double(fields[1], ctx);
        st.meta.y_km = parse_double(fields[2], ctx);
        st.meta.dist_coast_km = parse_double(fields[3], ctx);
        st.meta.sx = fields[4].empty() ? DailyTemperatureSeries::kMissing
                                       : parse_double(fields[4], ctx);
        stage = 2;
        break;
      case 2:
        if (fields != std::vector<std::string>{"date", "tmax", "tmin"}) {
          throw DataError(ctx + ": expected data header 'date,tmax,tmin'");
        }
        stage = 3;
        break;
      default: {
        if (fields.size() != 3) throw DataError(ctx + ": expected 3 fields");
        const Date date = parse_date(fields[0]);
        if (have_last) {
          const long prev = (static_cast<long>(last_date.year) << 9) |
                            (last_date.month << 5) | last_date.day;
          const long cur = (static_cast<long>(date.year) << 9) |
                           (date.month << 5) | date.day;
          if (cur == prev) {
            throw DataError(ctx + ": duplicate date " + fields[0]);
          }
          if (cur < prev) {
            throw DataError(ctx + ": dates not increasing at " + fields[0]);
          }
        }
        last_date = date;
        have_last = true;
        st.rows.push_back({date,
                           {parse_temp_field(fields[1], ctx),
                            parse_temp_field(fields[2], ctx)}});
        break;
      }
    }
  }
  if (stage != 3) throw DataError(path + ": incomplete station file");
  return st;
}

}  // namespace

IngestResult ingest(const std::vector<std::string>& paths, int first_year,
                    int last_year, int n_days) {
  if (paths.empty()) throw DataError("ingest: no input files");
  if (n_days < 1 || n_days > kSummerDays) {
    throw ConfigError("ingest: n_days must lie in [1, 92]");
  }
  std::vector<RawStation> raw;
  for (const auto& p : paths) raw.push_back(read_station_file(p));

  int lo = first_year, hi = last_year;
  if (lo == 0 || hi == 0) {
    int dlo = 1 << 30, dhi = -(1 << 30);
    for (const auto& st : raw) {
      for (const auto& [date, vals] : st.rows) {
        dlo = std::min(dlo, date.year);
        dhi = std::max(dhi, date.year);
      }
    }
    if (dhi < dlo) throw DataError("ingest: no data rows");
    if (lo == 0) lo = dlo;
    if (hi == 0) hi = dhi;
  }
  if (hi - lo + 1 < 2) throw DataError("ingest: study window needs T >= 2 years");

  SeriesLayout layout;
  layout.first_year = lo;
  layout.n_years = hi - lo + 1;
  layout.n_days = n_days;

  IngestResult out;
  for (const auto& st : raw) {
    DailyTemperatureSeries s;
    s.meta = st.meta;
    s.layout = layout;
    s.allocate();
    for (const auto& [date, vals] : st.rows) {
      if (date.year < lo || date.year > hi) continue;
      const int doy = day_of_year_nonleap(date);
      if (doy < kSeedDayLabel || doy > kSeedDayLabel + n_days) continue;
      const long cell = layout.cell(date.year - lo, doy - kSeedDayLabel);
      s.values[0][cell] = vals[0];
      s.values[1][cell] = vals[1];
    }
    for (int sig = 0; sig < 2; ++sig) {
      long miss = 0;
      for (double v : s.values[sig]) {
        if (!std::isfinite(v)) ++miss;
      }
      out.report.push_back(IngestReportRow{
          s.meta.id, sig == 0 ? "max" : "min", miss,
          static_cast<double>(miss) / static_cast<double>(s.values[sig].size())});
    }
    out.stations.push_back(std::move(s));
  }
  return out;
}

void write_station_csv(const std::string& path,
                       const DailyTemperatureSeries& series,
                       const std::string& meta) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  if (!meta.empty()) out << "# " << meta << "\n";
  out << "site_id,x_km,y_km,dist_coast_km,sx\n";
  out << series.meta.id << ',' << fmt_short(series.meta.x_km) << ','
      << fmt_short(series.meta.y_km) << ',' << fmt_short(series.meta.dist_coast_km)
      << ',' << (series.meta.has_sx() ? fmt_short(series.meta.sx) : "") << "\n";
  out << "date,tmax,tmin\n";
  const SeriesLayout& lay = series.layout;
  for (int t = 0; t < lay.n_years; ++t) {
    for (int d = 0; d < lay.days_per_year(); ++d) {
      int month = 0, day = 0;
      month_day_from_label(lay.day_label(d), &month, &day);
      char date[16];
      std::snprintf(date, sizeof(date), "%04d-%02d-%02d", lay.first_year + t,
                    month, day);
      const double vx = series.values[0][lay.cell(t, d)];
      const double vn = series.values[1][lay.cell(t, d)];
      out << date << ',' << (std::isfinite(vx) ? fmt_full(vx) : "") << ','
          << (std::isfinite(vn) ? fmt_full(vn) : "") << "\n";
    }
  }
  if (!out) throw DataError("write failure on '" + path + "'");
}

// ---------------------------------------------------------------------------
// Panel, stations, grid files
// ---------------------------------------------------------------------------

void write_panel_csv(const std::string& path, const RecordPanel& panel,
                     const std::string& meta) {
  CsvWriter w(path, meta, "site_id,year,day,signal,mark,r");
  const SeriesLayout& lay = panel.layout;
  for (int i = 0; i < panel.n_sites(); ++i) {
    for (int t = 0; t < lay.n_years; ++t) {
      for (int d = 0; d < lay.days_per_year(); ++d) {
        for (int sig = 0; sig < 2; ++sig) {
          const MarkCode m = panel.mark(static_cast<Signal>(sig), i, t, d);
          w.write_row({panel.site_ids[i], std::to_string(lay.first_year + t),
                       std::to_string(lay.day_label(d)), sig == 0 ? "max" : "min",
                       m <= 1 ? std::to_string(m) : "tied",
                       m <= 1 ? "" : std::to_string(m)});
        }
      }
    }
  }
  w.close();
}

RecordPanel read_panel_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const int c_site = column_index(t, "site_id", path);
  const int c_year = column_index(t, "year", path);
  const int c_day = column_index(t, "day", path);
  const int c_sig = column_index(t, "signal", path);
  const int c_mark = column_index(t, "mark", path);
  const int c_r = column_index(t, "r", path);
  if (t.rows.empty()) throw DataError(path + ": empty panel");

  int ymin = 1 << 30, ymax = -(1 << 30), dmax = 0;
  std::vector<std::string> site_order;
  for (const auto& row : t.rows) {
    const int y = static_cast<int>(parse_long(row[c_year], path));
    const int d = static_cast<int>(parse_long(row[c_day], path));
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
    dmax = std::max(dmax, d);
    if (std::find(site_order.begin(), site_order.end(), row[c_site]) ==
        site_order.end()) {
      site_order.push_back(row[c_site]);
    }
  }
  if (dmax < kSeedDayLabel + 1) throw DataError(path + ": no summer days present");

  RecordPanel panel;
  panel.layout.first_year = ymin;
  panel.layout.n_years = ymax - ymin + 1;
  panel.layout.n_days = dmax - kSeedDayLabel;
  panel.site_ids = site_order;
  for (int s = 0; s < 2; ++s) {
    panel.marks[s].assign(
        static_cast<long>(panel.n_sites()) * panel.layout.cells_per_site(),
        kMarkZero);
  }
  for (const auto& row : t.rows) {
    int site = -1;
    for (std::size_t i = 0; i < site_order.size(); ++i) {
      if (site_order[i] == row[c_site]) {
        site = static_cast<int>(i);
        break;
      }
    }
    const int y = static_cast<int>(parse_long(row[c_year], path)) - ymin;
    const int d = static_cast<int>(parse_long(row[c_day], path)) - kSeedDayLabel;
    if (d < 0 || d > panel.layout.n_days) {
      throw DataError(path + ": day label outside the study window");
    }
    const Signal sig = row[c_sig] == "max" ? Signal::Max : Signal::Min;
    MarkCode m;
    if (row[c_mark] == "tied") {
      m = static_cast<MarkCode>(parse_long(row[c_r], path));
      if (m < 2) throw DataError(path + ": tied mark needs r >= 2");
    } else {
      const long v = parse_long(row[c_mark], path);
      if (v != 0 && v != 1) throw DataError(path + ": mark must be 0, 1 or tied");
      m = static_cast<MarkCode>(v);
    }
    panel.mark(sig, site, y, d) = m;
  }
  return panel;
}

void write_stations_csv(const std::string& path,
                        const std::vector<StationMeta>& stations,
                        const std::string& meta) {
  CsvWriter w(path, meta, "site_id,x_km,y_km,dist_coast_km,sx");
  for (const auto& s : stations) {
    w.write_row({s.id, fmt_full(s.x_km), fmt_full(s.y_km),
                 fmt_full(s.dist_coast_km), s.has_sx() ? fmt_full(s.sx) : ""});
  }
  w.close();
}

std::vector<StationMeta> read_stations_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const int c_id = column_index(t, "site_id", path);
  const int c_x = column_index(t, "x_km", path);
  const int c_y = column_index(t, "y_km", path);
  const int c_d = column_index(t, "dist_coast_km", path);
  const int c_sx = column_index(t, "sx", path);
  std::vector<StationMeta> out;
  for (const auto& row : t.rows) {
    StationMeta m;
    m.id = row[c_id];
    m.x_km = parse_double(row[c_x], path);
    m.y_km = parse_double(row[c_y], path);
    m.dist_coast_km = parse_double(row[c_d], path);
    m.sx = row[c_sx].empty() ? DailyTemperatureSeries::kMissing
                             : parse_double(row[c_sx], path);
    out.push_back(std::move(m));
  }
  return out;
}

GridSpec read_grid_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const int c_id = column_index(t, "cell_id", path);
  const int c_x = column_index(t, "x_km", path);
  const int c_y = column_index(t, "y_km", path);
  const int c_d = column_index(t, "dist_coast_km", path);
  int c_sx = -1;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "sx") c_sx = static_cast<int>(i);
  }
  GridSpec g;
  for (const auto& row : t.rows) {
    GridCell c;
    c.id = row[c_id];
    c.x_km = parse_double(row[c_x], path);
    c.y_km = parse_double(row[c_y], path);
    c.dist_coast_km = parse_double(row[c_d], path);
    if (c_sx >= 0 && !row[c_sx].empty()) c.sx = parse_double(row[c_sx], path);
    g.cells.push_back(std::move(c));
  }
  if (g.cells.empty()) throw DataError(path + ": empty grid");
  return g;
}

// ---------------------------------------------------------------------------
// Fit artifacts
// ---------------------------------------------------------------------------

namespace {

void write_params_csv(const std::string& path, const PosteriorDraws& draws,
                      const std::string& meta) {
  CsvWriter w(path, meta, "chain,draw,sweep,parameter,value");
  for (const auto& ch : draws.chains) {
    for (Eigen::Index r = 0; r < ch.values.rows(); ++r) {
      for (std::size_t p = 0; p < draws.names.size(); ++p) {
        w.write_row({std::to_string(ch.chain_id), std::to_string(r),
                     std::to_string(ch.sweep[static_cast<std::size_t>(r)]),
                     draws.names[p],
                     fmt_full(ch.values(r, static_cast<Eigen::Index>(p)))});
      }
    }
  }
  w.close();
}

void write_wfields_bin(const std::string& path, const PosteriorDraws& draws,
                       const std::string& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "# " << meta << "\n";
  ordered_json hdr;
  hdr["chains"] = draws.chains.size();
  hdr["n_proc"] = draws.variant.id == Variant::M1 ? 2 : 2;
  ordered_json rows = ordered_json::array();
  int n_sites = 0;
  long n_slices = 0;
  for (const auto& ch : draws.chains) {
    rows.push_back(ch.w_draw_rows);
    if (!ch.w0.empty()) {
      n_sites = static_cast<int>(ch.w0[0].rows());
      n_slices = static_cast<long>(ch.w0[0].cols());
    }
  }
  hdr["w_draw_rows"] = rows;
  hdr["n_sites"] = n_sites;
  hdr["n_slices"] = n_slices;
  out << hdr.dump() << "\n";
  for (const auto& ch : draws.chains) {
    for (std::size_t i = 0; i < ch.w0.size(); ++i) {
      out.write(reinterpret_cast<const char*>(ch.w0[i].data()),
                static_cast<std::streamsize>(sizeof(double) * ch.w0[i].size()));
      if (ch.w1[i].size() > 0) {
        out.write(reinterpret_cast<const char*>(ch.w1[i].data()),
                  static_cast<std::streamsize>(sizeof(double) * ch.w1[i].size()));
      }
    }
  }
  if (!out) throw DataError("write failure on '" + path + "'");
}

}  // namespace

void write_fit_artifacts(const std::string& dir, const FitArtifacts& art,
                         const Config& config, std::uint64_t seed,
                         const SamplerConfig& sampler) {
  const std::string meta = meta_comment(config, seed);
  ordered_json m;
  m["artifact"] = "bivrec";
  m["version"] = kArtifactVersion;
  m["config_hash"] = config.hash_hex();
  m["seed"] = seed;
  m["variant"] = art.variant.name();
  m["layout"] = {{"first_year", art.layout.first_year},
                 {"n_years", art.layout.n_years},
                 {"n_days", art.layout.n_days}};
  ordered_json stations = ordered_json::array();
  for (const auto& s : art.stations) {
    ordered_json e;
    e["id"] = s.id;
    e["x_km"] = s.x_km;
    e["y_km"] = s.y_km;
    e["dist_coast_km"] = s.dist_coast_km;
    if (s.has_sx()) e["sx"] = s.sx;
    stations.push_back(e);
  }
  m["stations"] = stations;
  if (art.station_covariate.size() > 0) {
    std::vector<double> cov(art.station_covariate.data(),
                            art.station_covariate.data() + art.station_covariate.size());
    m["station_covariate"] = cov;
  }
  ordered_json sp = ordered_json::array();
  for (Eigen::Index t = 0; t < art.seed_prob.rows(); ++t) {
    sp.push_back({art.seed_prob(t, 0), art.seed_prob(t, 1)});
  }
  m["seed_prob"] = sp;
  m["phi_a"] = art.phi_a;
  m["covariate_krige_phi"] = art.covariate_krige_phi;
  m["m0_draws"] = art.m0_draws;
  m["names"] = art.draws.names;
  m["sampler"] = {{"sweeps", sampler.sweeps},
                  {"burn_in_fraction", sampler.burn_in_fraction},
                  {"thin_to", sampler.thin_to},
                  {"chains", sampler.n_chains},
                  {"w_store", sampler.w_store}};

  std::ofstream mo(dir + "/manifest.json");
  if (!mo) throw DataError("cannot write '" + dir + "/manifest.json'");
  mo << m.dump(2) << "\n";
  if (!mo) throw DataError("write failure on manifest.json");
  mo.close();

  if (!art.variant.stationary()) {
    write_params_csv(dir + "/params.csv", art.draws, meta);
    write_wfields_bin(dir + "/wfields.bin", art.draws, meta);
  }
}

FitArtifacts load_fit_artifacts(const std::string& dir) {
  std::ifstream mi(dir + "/manifest.json");
  if (!mi) throw DataError("cannot open '" + dir + "/manifest.json'");
  ordered_json m = ordered_json::parse(mi);

  FitArtifacts art;
  art.variant = VariantSpec::parse(m.at("variant").get<std::string>());
  art.layout.first_year = m.at("layout").at("first_year").get<int>();
  art.layout.n_years = m.at("layout").at("n_years").get<int>();
  art.layout.n_days = m.at("layout").at("n_days").get<int>();
  for (const auto& e : m.at("stations")) {
    StationMeta s;
    s.id = e.at("id").get<std::string>();
    s.x_km = e.at("x_km").get<double>();
    s.y_km = e.at("y_km").get<double>();
    s.dist_coast_km = e.at("dist_coast_km").get<double>();
    if (e.contains("sx")) s.sx = e.at("sx").get<double>();
    art.stations.push_back(std::move(s));
  }
  if (m.contains("station_covariate")) {
    const auto cov = m.at("station_covariate").get<std::vector<double>>();
    art.station_covariate =
        Eigen::Map<const Eigen::VectorXd>(cov.data(), static_cast<Eigen::Index>(cov.size()));
  }
  const auto& sp = m.at("seed_prob");
  art.seed_prob.resize(static_cast<Eigen::Index>(sp.size()), 2);
  for (std::size_t t = 0; t < sp.size(); ++t) {
    art.seed_prob(static_cast<Eigen::Index>(t), 0) = sp[t][0].get<double>();
    art.seed_prob(static_cast<Eigen::Index>(t), 1) = sp[t][1].get<double>();
  }
  art.phi_a = m.at("phi_a").get<double>();
  art.covariate_krige_phi = m.at("covariate_krige_phi").get<double>();
  art.m0_draws = m.at("m0_draws").get<int>();
  art.draws.variant = art.variant;
  art.draws.names = m.at("names").get<std::vector<std::string>>();
  if (art.variant.stationary()) return art;

  // params.csv -> per-chain value matrices
  CsvTable pt = read_csv(dir + "/params.csv");
  const int c_chain = column_index(pt, "chain", dir);
  const int c_draw = column_index(pt, "draw", dir);
  const int c_sweep = column_index(pt, "sweep", dir);
  const int c_param = column_index(pt, "parameter", dir);
  const int c_value = column_index(pt, "value", dir);
  std::map<std::string, int> name_pos;
  for (std::size_t i = 0; i < art.draws.names.size(); ++i) {
    name_pos[art.draws.names[i]] = static_cast<int>(i);
  }
  std::map<int, std::map<int, std::pair<long, std::vector<double>>>> table;
  for (const auto& row : pt.rows) {
    const int chain = static_cast<int>(parse_long(row[c_chain], dir));
    const int draw = static_cast<int>(parse_long(row[c_draw], dir));
    auto& slot = table[chain][draw];
    if (slot.second.empty()) {
      slot.second.assign(art.draws.names.size(), 0.0);
      slot.first = parse_long(row[c_sweep], dir);
    }
    const auto it = name_pos.find(row[c_param]);
    if (it == name_pos.end()) throw DataError("params.csv: unknown parameter");
    slot.second[static_cast<std::size_t>(it->second)] =
        parse_double(row[c_value], dir);
  }
  for (const auto& [chain_id, rows] : table) {
    ChainDraws cd;
    cd.chain_id = chain_id;
    cd.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(art.draws.names.size()));
    for (const auto& [draw, slot] : rows) {
      cd.sweep.push_back(slot.first);
      for (std::size_t p = 0; p < slot.second.size(); ++p) {
        cd.values(draw, static_cast<Eigen::Index>(p)) = slot.second[p];
      }
    }
    art.draws.chains.push_back(std::move(cd));
  }

  // wfields.bin
  std::ifstream wb(dir + "/wfields.bin", std::ios::binary);
  if (!wb) throw DataError("cannot open '" + dir + "/wfields.bin'");
  std::string line;
  std::getline(wb, line);  // provenance comment
  std::getline(wb, line);
  ordered_json hdr = ordered_json::parse(line);
  const int n_sites = hdr.at("n_sites").get<int>();
  const long n_slices = hdr.at("n_slices").get<long>();
  const auto rows_per_chain = hdr.at("w_draw_rows").get<std::vector<std::vector<int>>>();
  if (rows_per_chain.size() != art.draws.chains.size()) {
    throw DataError("wfields.bin: chain count mismatch");
  }
  for (std::size_t c = 0; c < rows_per_chain.size(); ++c) {
    auto& cd = art.draws.chains[c];
    cd.w_draw_rows = rows_per_chain[c];
    for (std::size_t i = 0; i < cd.w_draw_rows.size(); ++i) {
      Eigen::MatrixXd w0(n_sites, n_slices), w1(n_sites, n_slices);
      wb.read(reinterpret_cast<char*>(w0.data()),
              static_cast<std::streamsize>(sizeof(double) * w0.size()));
      wb.read(reinterpret_cast<char*>(w1.data()),
              static_cast<std::streamsize>(sizeof(double) * w1.size()));
      if (!wb) throw DataError("wfields.bin: truncated payload");
      cd.w0.push_back(std::move(w0));
      cd.w1.push_back(std::move(w1));
    }
  }
  return art;
}

}  // namespace bivrec
