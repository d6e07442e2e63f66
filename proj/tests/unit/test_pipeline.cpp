#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "firemarg/config.hpp"
#include "firemarg/pipeline.hpp"
#include "firemarg/predict.hpp"
#include "firemarg/synth.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace firemarg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("firemarg_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

RunConfig small_run(const std::string& dir) {
  RunConfig c;
  c.output_dir = dir;
  c.synth.lon_max = -100;
  c.synth.months = {6, 7};
  c.synth.years = {2001, 2002};
  c.grid.radii = {100, 150, 200};
  c.grid.quantiles = {0.5, 0.8};
  return c;
}

}  // namespace

TEST_SUITE("pipeline_cli") {
  TEST_CASE("parse_list") {
    CHECK(parse_list("1, 2.5,3") == std::vector<double>{1, 2.5, 3});
    CHECK(parse_list("50:150:25") == std::vector<double>{50, 75, 100, 125, 150});
    CHECK(parse_list("0.05:0.95:0.05").size() == 19);
    CHECK_THROWS(parse_list("1,,2"));
    CHECK_THROWS(parse_list("5:1:1"));
    CHECK_THROWS(parse_list("1:2"));
  }

  TEST_CASE("config dump parses back to the same dump") {
    RunConfig c;
    c.k1_cnt = 137.5;
    c.variant = NeighborhoodVariant::Temporal;
    c.ky = 3;
    c.rules.water = false;
    c.synth.hotspot.mu = {2.5, 7.25};
    c.synth.years = {1999, 2000};
    c.seed = 123456789012345ULL;
    const auto text = dump_config(c);
    std::istringstream in(text);
    const auto back = parse_config(in);
    CHECK(dump_config(back) == text);
    CHECK(back.k1_cnt == 137.5);
    CHECK(back.synth.hotspot.mu.hi == 7.25);
    CHECK(back.seed == 123456789012345ULL);
    CHECK(config_hash(back) == config_hash(c));
  }

  TEST_CASE("config rejects unknown keys and bad values") {
    std::istringstream unknown("[model]\nradius = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), std::invalid_argument);
    std::istringstream section("[nope]\nk = 1\n");
    CHECK_THROWS_AS(parse_config(section), std::invalid_argument);
    std::istringstream bad("[model]\nk2 = half\n");
    CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
    std::istringstream flag("[rules]\npair = maybe\n");
    CHECK_THROWS_AS(parse_config(flag), std::invalid_argument);
  }

  TEST_CASE("hash ignores workers and output directory only") {
    RunConfig a, b;
    b.workers = 7;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.water_cut = 0.95;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("referenced files must exist") {
    RunConfig c;
    c.input = "/nonexistent/data.csv";
    CHECK_THROWS(c.validate());
  }

  TEST_CASE("weights file") {
    const ThresholdGrids g{{0, 1}, {0, 10, 100}};
    std::istringstream ok("variable,threshold,weight\ncnt,0,1\ncnt,1,2\nba,0,1\nba,10,0\nba,100,5\n");
    const auto w = parse_weights(ok, g);
    CHECK(w.cnt.weights == std::vector<double>{1, 2});
    CHECK(w.ba.weights == std::vector<double>{1, 0, 5});
    std::istringstream missing("variable,threshold,weight\ncnt,0,1\nba,0,1\nba,10,1\nba,100,1\n");
    CHECK_THROWS(parse_weights(missing, g));
    std::istringstream dup("variable,threshold,weight\ncnt,0,1\ncnt,0,1\ncnt,1,1\nba,0,1\nba,10,1\nba,100,1\n");
    CHECK_THROWS_AS(parse_weights(dup, g), DataError);
    std::istringstream off("variable,threshold,weight\ncnt,7,1\n");
    CHECK_THROWS_AS(parse_weights(off, g), DataError);
  }

  TEST_CASE("synth: no missingness and full overlap") {
    SyntheticSpec s;
    s.lon_max = -100;
    s.years = {2001};
    s.missing_rate = 0.0;
    auto d = synth(s, 3);
    CHECK(d.data.missing(Variable::Count).empty());
    CHECK(d.data.missing(Variable::BurntArea).empty());

    s.missing_rate = 0.05;
    s.overlap = 1.0;
    d = synth(s, 3);
    CHECK_FALSE(d.data.missing(Variable::Count).empty());
    CHECK(d.data.missing(Variable::Count) == d.data.missing(Variable::BurntArea));
    CHECK(deduce_from_pair(d.data).empty());
  }

  TEST_CASE("synth: planted zero fraction") {
    std::mt19937_64 rng(77);
    for (const ZinbParams p : {ZinbParams{0.2, 1.0, 1.0}, ZinbParams{0.7, 0.5, 0.8}, ZinbParams{0.05, 20, 3}}) {
      int zeros = 0;
      for (int k = 0; k < 5000; ++k) zeros += sample_zinb(p, rng) == 0;
      CHECK(std::abs(zeros / 5000.0 - zinb_pmf(p, 0)) < 0.02);
    }
  }

  TEST_CASE("synth: infeasible spec") {
    SyntheticSpec s;
    s.shared_radius_km = 5000;
    CHECK_THROWS(synth(s, 1));
  }

  TEST_CASE("predict: forced rows and saturation") {
    using testing::obs;
    std::vector<Observation> rows;
    for (int k = 0; k < 30; ++k) rows.push_back(obs(0.5 * k, 50, 6, 2000, k % 4, (k % 4) * 40.0));
    rows.push_back(obs(2.25, 50.0, 6, 2000, std::nullopt, std::nullopt, 0.97));
    auto tiny = obs(2.75, 50.0, 6, 2000, 3, std::nullopt);
    tiny.area_fraction = 0.01;
    rows.push_back(tiny);
    const auto d = testing::dataset(rows);
    const auto bap = compute_bap(d, GeoConfig{});
    PredictOptions o;
    o.cnt_spec.radius_km = o.ba_spec.radius_km = 500;
    const auto p = predict(d, bap, o);
    REQUIRE(p.cnt.rows.size() == 1);
    REQUIRE(p.ba.rows.size() == 2);
    for (double v : p.cnt.rows[0].cdf) CHECK(v == 1.0);
    for (double v : p.ba.rows[0].cdf) CHECK(v == 1.0);
    const auto& sat = p.ba.rows[1].cdf;
    const auto th = bap.thresholds(31, d.thresholds(Variable::BurntArea));
    CHECK(sat[0] == 0.0);
    bool seen = false;
    for (std::size_t k = 0; k < sat.size(); ++k) {
      if (th[k].forced_one) seen = true;
      if (seen) CHECK(sat[k] == 1.0);
    }
    CHECK(seen);
    CHECK(th.front().forced_one == false);
  }

  TEST_CASE("predict: planted truth within 0.05 at n >= 2000") {
    using testing::obs;
    const ZinbParams zp{0.25, 6.0, 2.0};
    const double z = 0.3, scale = 0.002, xi = 0.2;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Observation> rows;
    for (int a = 0; a < 50; ++a)
      for (int b = 0; b < 50; ++b) {
        const double bp = unif(rng) < z ? 0.0 : std::min(1.0, scale * (std::pow(1 - unif(rng), -xi) - 1) / xi);
        const double cap = zone_area_km2({-120 + 0.5 * a, 30 + 0.5 * b, 0.5, 0.5}) * kAcresPerKm2;
        rows.push_back(obs(-120 + 0.5 * a, 30 + 0.5 * b, 6, 2000, sample_zinb(zp, rng), bp * cap));
      }
    rows[1275].cnt.reset();
    rows[1275].ba.reset();
    const auto d = testing::dataset(rows);
    const auto bap = compute_bap(d, GeoConfig{});
    PredictOptions o;
    o.cnt_spec.radius_km = o.ba_spec.radius_km = 5000;
    o.k2 = 0.8;
    const auto p = predict(d, bap, o);
    REQUIRE(p.diagnostics.size() == 2);
    CHECK(p.diagnostics[0].sample_size >= 2000);

    const auto truth = zinb_cdf_row(zp, d.thresholds(Variable::Count));
    for (std::size_t k = 0; k < truth.size(); ++k) CHECK(std::abs(p.cnt.rows[0].cdf[k] - truth[k]) < 0.05);

    const auto th = bap.thresholds(1275, d.thresholds(Variable::BurntArea));
    for (std::size_t k = 0; k < th.size(); ++k) {
      const double x = th[k].value;
      const double t = x >= 1.0 ? 1.0 : z + (1 - z) * (1 - std::pow(1 + xi * x / scale, -1 / xi));
      CHECK(std::abs(p.ba.rows[0].cdf[k] - t) < 0.05);
    }
  }

  TEST_CASE("run_all: artifacts, manifest and determinism across workers") {
    const auto d1 = scratch("run1"), d2 = scratch("run2");
    auto c = small_run(d1.string());
    c.workers = 1;
    const auto r = run_all(c);
    REQUIRE(r.scores);
    c.output_dir = d2.string();
    c.workers = 3;
    run_all(c);
    for (const char* f : {"dataset.csv", "truth.csv", "rules_audit.csv", "tuning_cnt.csv", "tuning_ba.csv",
                          "predictions_cnt.csv", "predictions_ba.csv", "diagnostics.csv", "scores.csv",
                          "manifest.json"}) {
      REQUIRE(std::filesystem::exists(d1 / f));
      CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    const auto m = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    CHECK(m["config_sha256"] == config_hash(c));
    CHECK(m["seed"] == 1);
    CHECK(m["config"]["model"]["k2"] == "0.5");
    CHECK(m["outputs"]["scores.csv"] == sha256_hex(slurp(d1 / "scores.csv")));
    CHECK_FALSE(m["config"]["run"].contains("workers"));

    std::istringstream pred(slurp(d1 / "predictions_cnt.csv"));
    const auto table = read_predictions_csv(pred, Variable::Count);
    std::set<std::size_t> ids;
    for (const auto& row : table.rows) CHECK(ids.insert(row.index).second);
  }

  TEST_CASE("run_all: stage-labelled failures") {
    const auto dir = scratch("bad");
    auto c = small_run(dir.string());
    c.synth.shared_radius_km = 5000;
    try {
      run_all(c);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "ingest");
      CHECK(std::string(e.what()).starts_with("[ingest] "));
    }
    c = small_run(dir.string());
    c.k2 = 1.5;
    c.tune = false;
    try {
      run_all(c);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "config");
    }
  }

  TEST_CASE("variant table layout") {
    VariantTable t{{50, 100}, {1, 2}, {3, 4, 5, 1, 6, 7}};
    CHECK(t.best(0) == 1);
    CHECK(t.best(2) == 5);
    std::ostringstream out;
    write_variant_table_csv(t, out);
    CHECK(out.str() ==
          "k1,spatial,ky=1,ky=2\n50,3.000,4.000,5.000\n100,1.000,6.000,7.000\nbest,1.000,4.000,5.000\n");
  }
}
