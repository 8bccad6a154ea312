#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bivrec/csv.hpp"
#include "bivrec/io.hpp"
#include "bivrec/mcmc.hpp"
#include "bivrec/synthetic.hpp"

using namespace bivrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bivrec_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("config parsing, environment override, hashing") {
  TempDir dir;
  write_file(dir / "run.conf",
             "# comment line\n"
             "variant = M3\n"
             "sweeps=1234   # trailing comment\n"
             "prior.beta_sd = 2.5\n");
  Config cfg = Config::from_file(dir / "run.conf");
  CHECK(cfg.get_string("variant", "") == "M3");
  CHECK(cfg.get_long("sweeps", 0) == 1234);
  CHECK(cfg.get_double("prior.beta_sd", 0) == doctest::Approx(2.5));
  CHECK(cfg.get_long("absent", 42) == 42);

  const std::string h1 = cfg.hash_hex();
  CHECK(h1.size() == 16);
  ::setenv("BIVREC_SWEEPS", "99", 1);
  ::setenv("BIVREC_PRIOR_A21_SD", "3.5", 1);
  cfg.apply_environment();
  ::unsetenv("BIVREC_SWEEPS");
  ::unsetenv("BIVREC_PRIOR_A21_SD");
  CHECK(cfg.get_long("sweeps", 0) == 99);
  CHECK(cfg.get_double("prior.a21_sd", 0) == doctest::Approx(3.5));
  CHECK(cfg.hash_hex() != h1);

  const SamplerConfig sc = cfg.sampler_config();
  CHECK(sc.variant.id == Variant::M3);
  CHECK(sc.sweeps == 99);
  CHECK(sc.prior.a21_sd == doctest::Approx(3.5));

  write_file(dir / "bad.conf", "not a key value line\n");
  CHECK_THROWS_AS(Config::from_file(dir / "bad.conf"), ConfigError);
}

TEST_CASE("station ingestion") {
  TempDir dir;
  const char* station =
      "site_id,x_km,y_km,dist_coast_km,sx\n"
      "S1,10.0,20.0,5.5,2.25\n"
      "date,tmax,tmin\n"
      "1961-05-31,21.4,10.2\n"
      "1961-06-01,22.0,\n"
      "1961-06-02,23.1,11.0\n"
      "1962-05-31,20.0,9.0\n"
      "1962-06-01,24.5,12.5\n"
      "1962-06-02,,13.0\n";
  write_file(dir / "s1.csv", station);

  SUBCASE("well-formed file round trips") {
    const IngestResult r = ingest({dir / "s1.csv"}, 0, 0, 2);
    REQUIRE(r.stations.size() == 1);
    const auto& s = r.stations[0];
    CHECK(s.meta.id == "S1");
    CHECK(s.meta.sx == doctest::Approx(2.25));
    CHECK(s.layout.first_year == 1961);
    CHECK(s.layout.n_years == 2);
    CHECK(s.value(Signal::Max, 0, 0) == doctest::Approx(21.4));
    CHECK(s.missing(Signal::Min, 0, 1));  // empty tmin field
    CHECK(s.missing(Signal::Max, 1, 2));  // empty tmax field
    long missing_min = 0;
    for (const auto& row : r.report) {
      if (row.signal == "min") missing_min = row.n_missing;
    }
    CHECK(missing_min == 1);
  }
  SUBCASE("duplicate dates are rejected") {
    write_file(dir / "dup.csv",
               "site_id,x_km,y_km,dist_coast_km,sx\n"
               "S2,0,0,0,\n"
               "date,tmax,tmin\n"
               "1961-06-01,20.0,10.0\n"
               "1961-06-01,21.0,11.0\n");
    CHECK_THROWS_AS(ingest({dir / "dup.csv"}), DataError);
  }
  SUBCASE("non-monotone dates are rejected") {
    write_file(dir / "mono.csv",
               "site_id,x_km,y_km,dist_coast_km,sx\n"
               "S2,0,0,0,\n"
               "date,tmax,tmin\n"
               "1961-06-02,20.0,10.0\n"
               "1961-06-01,21.0,11.0\n");
    CHECK_THROWS_AS(ingest({dir / "mono.csv"}), DataError);
  }
  SUBCASE("schema violations are rejected") {
    write_file(dir / "schema.csv", "wrong,header\n1,2\n");
    CHECK_THROWS_AS(ingest({dir / "schema.csv"}), DataError);
    write_file(dir / "baddate.csv",
               "site_id,x_km,y_km,dist_coast_km,sx\n"
               "S2,0,0,0,\n"
               "date,tmax,tmin\n"
               "1961-13-01,20.0,10.0\n");
    CHECK_THROWS_AS(ingest({dir / "baddate.csv"}), DataError);
  }
  SUBCASE("leap-day rows are dropped, labels stay aligned") {
    write_file(dir / "leap.csv",
               "site_id,x_km,y_km,dist_coast_km,sx\n"
               "S3,0,0,0,\n"
               "date,tmax,tmin\n"
               "1960-02-29,1.0,0.0\n"
               "1960-05-31,20.0,10.0\n"
               "1960-06-01,21.0,11.0\n"
               "1961-05-31,19.0,9.0\n"
               "1961-06-01,22.0,12.0\n");
    const IngestResult r = ingest({dir / "leap.csv"}, 0, 0, 1);
    // 1960 is a leap year; 31 May must still land on the seed day label
    CHECK(r.stations[0].value(Signal::Max, 0, 0) == doctest::Approx(20.0));
    CHECK(r.stations[0].value(Signal::Max, 1, 1) == doctest::Approx(22.0));
  }
}

TEST_CASE("panel and station files are lossless") {
  SyntheticSpec spec;
  spec.n_sites = 4;
  spec.n_years = 7;
  spec.n_days = 6;
  spec.tie_rate = 0.2;
  spec.missing_rate = 0.1;
  const SyntheticData data = generate_synthetic(spec, 55);

  TempDir dir;
  write_panel_csv(dir / "panel.csv", data.truth_panel, "meta");
  const RecordPanel back = read_panel_csv(dir / "panel.csv");
  CHECK(back.layout == data.truth_panel.layout);
  CHECK(back.site_ids == data.truth_panel.site_ids);
  CHECK(back.marks[0] == data.truth_panel.marks[0]);
  CHECK(back.marks[1] == data.truth_panel.marks[1]);

  std::vector<StationMeta> metas;
  for (const auto& st : data.stations) metas.push_back(st.meta);
  write_stations_csv(dir / "stations.csv", metas, "meta");
  const auto metas_back = read_stations_csv(dir / "stations.csv");
  REQUIRE(metas_back.size() == metas.size());
  for (std::size_t i = 0; i < metas.size(); ++i) {
    CHECK(metas_back[i].id == metas[i].id);
    CHECK(metas_back[i].x_km == metas[i].x_km);
    CHECK(metas_back[i].dist_coast_km == metas[i].dist_coast_km);
    CHECK(metas_back[i].sx == doctest::Approx(metas[i].sx));
  }

  // full circle: station CSV -> ingest -> extract == truth panel
  for (const auto& st : data.stations) {
    write_station_csv(dir / (st.meta.id + ".csv"), st, "meta");
  }
  std::vector<std::string> paths;
  for (const auto& st : data.stations) paths.push_back(dir / (st.meta.id + ".csv"));
  const IngestResult r = ingest(paths, 0, 0, spec.n_days);
  const RecordPanel again = extract_indicators(r.stations);
  CHECK(again.marks[0] == data.truth_panel.marks[0]);
  CHECK(again.marks[1] == data.truth_panel.marks[1]);
}

TEST_CASE("grid files") {
  TempDir dir;
  write_file(dir / "grid.csv",
             "cell_id,x_km,y_km,dist_coast_km,sx\n"
             "G0,0.0,0.0,12.0,2.5\n"
             "G1,25.0,0.0,40.0,\n");
  const GridSpec g = read_grid_csv(dir / "grid.csv");
  REQUIRE(g.size() == 2);
  CHECK(g.cells[0].has_sx());
  CHECK(!g.cells[1].has_sx());
  write_file(dir / "nogrid.csv", "cell_id,x_km,y_km,dist_coast_km\n");
  CHECK_THROWS_AS(read_grid_csv(dir / "nogrid.csv"), DataError);
}

TEST_CASE("fit artifacts round trip") {
  SyntheticSpec spec;
  spec.n_sites = 5;
  spec.n_years = 8;
  spec.n_days = 6;
  const SyntheticData data = generate_synthetic(spec, 808);
  std::vector<StationMeta> metas;
  for (const auto& st : data.stations) metas.push_back(st.meta);
  FitData fd = prepare_fit_data(data.truth_panel, metas, false);

  SamplerConfig config;
  config.variant = VariantSpec{Variant::M2};
  config.sweeps = 300;
  config.thin_to = 30;
  config.n_chains = 2;
  config.seed = 3;
  config.w_store = 6;

  FitArtifacts art;
  art.variant = config.variant;
  art.layout = data.truth_panel.layout;
  art.stations = metas;
  art.seed_prob = seed_day_probabilities(data.truth_panel);
  art.draws = run_chains(fd, config);

  TempDir dir;
  Config cfg;
  write_fit_artifacts(dir.path.string(), art, cfg, config.seed, config);
  const FitArtifacts back = load_fit_artifacts(dir.path.string());

  CHECK(back.variant.id == art.variant.id);
  CHECK(back.layout == art.layout);
  REQUIRE(back.draws.chains.size() == art.draws.chains.size());
  CHECK(back.draws.names == art.draws.names);
  for (std::size_t c = 0; c < art.draws.chains.size(); ++c) {
    CHECK(back.draws.chains[c].values == art.draws.chains[c].values);
    CHECK(back.draws.chains[c].w_draw_rows == art.draws.chains[c].w_draw_rows);
    REQUIRE(back.draws.chains[c].w0.size() == art.draws.chains[c].w0.size());
    for (std::size_t i = 0; i < art.draws.chains[c].w0.size(); ++i) {
      CHECK(back.draws.chains[c].w0[i] == art.draws.chains[c].w0[i]);
      CHECK(back.draws.chains[c].w1[i] == art.draws.chains[c].w1[i]);
    }
  }
  CHECK((back.seed_prob - art.seed_prob).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("output files carry the provenance header") {
  TempDir dir;
  Config cfg;
  cfg.set("variant", "M2");
  const std::string meta = meta_comment(cfg, 17);
  CHECK(meta.find("bivrec") == 0);
  CHECK(meta.find("seed=17") != std::string::npos);
  CsvWriter w(dir / "out.csv", meta, "a,b");
  w.write_row({"1", "2"});
  w.close();
  std::ifstream in(dir / "out.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# bivrec " + std::string(kArtifactVersion), 0) == 0);
}
