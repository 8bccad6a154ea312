#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bivrec/mcmc.hpp"
#include "bivrec/predict.hpp"
#include "bivrec/records.hpp"

namespace bivrec {

inline constexpr const char* kArtifactVersion = "0.1.0";

// key=value configuration with '#' comments. Environment variables override
// file values: key `sweeps` reads BIVREC_SWEEPS, `prior.beta_sd` reads
// BIVREC_PRIOR_BETA_SD.
class Config {
 public:
  static Config from_file(const std::string& path);
  Config() = default;

  void apply_environment(const std::string& prefix = "BIVREC_");
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  long get_long(const std::string& key, long dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;

  // Canonical "key=value\n" listing, sorted by key.
  std::string normalized() const;
  // FNV-1a hash of the normalized listing, as fixed-width hex.
  std::string hash_hex() const;

  SamplerConfig sampler_config() const;

 private:
  std::map<std::string, std::string> kv_;
};

// The '# ...' provenance line every output file starts with.
std::string meta_comment(const Config& config, std::uint64_t seed);

// ---- station ingestion -----------------------------------------------------

struct IngestReportRow {
  std::string site_id;
  std::string signal;
  long n_missing = 0;
  double fraction = 0.0;
};

struct IngestResult {
  std::vector<DailyTemperatureSeries> stations;
  std::vector<IngestReportRow> report;
};

// Reads one CSV per station: a station header (site_id,x_km,y_km,
// dist_coast_km,sx) and its value row, then date,tmax,tmin rows with empty
// fields for missing observations. Fills the study window, validates date
// order and duplicates. first/last year 0 = take the data's span.
IngestResult ingest(const std::vector<std::string>& paths, int first_year = 0,
                    int last_year = 0, int n_days = kSummerDays);

void write_station_csv(const std::string& path,
                       const DailyTemperatureSeries& series,
                       const std::string& meta);

// ---- panel and grid files ----------------------------------------------------

void write_panel_csv(const std::string& path, const RecordPanel& panel,
                     const std::string& meta);
RecordPanel read_panel_csv(const std::string& path);

void write_stations_csv(const std::string& path,
                        const std::vector<StationMeta>& stations,
                        const std::string& meta);
std::vector<StationMeta> read_stations_csv(const std::string& path);

GridSpec read_grid_csv(const std::string& path);

// ---- fit artifacts ----------------------------------------------------------

// Writes manifest.json, params.csv and wfields.bin under `dir`.
void write_fit_artifacts(const std::string& dir, const FitArtifacts& art,
                         const Config& config, std::uint64_t seed,
                         const SamplerConfig& sampler);

FitArtifacts load_fit_artifacts(const std::string& dir);

}  // namespace bivrec
