// Acceptance checks AC1..AC10. Prints one PASS/FAIL line per criterion and
// exits non-zero when any selected criterion fails or exceeds its time limit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "firemarg/ba_model.hpp"
#include "firemarg/count_model.hpp"
#include "firemarg/dependence.hpp"
#include "firemarg/geo.hpp"
#include "firemarg/marginal.hpp"
#include "firemarg/pipeline.hpp"
#include "firemarg/predict.hpp"
#include "firemarg/scoring.hpp"
#include "firemarg/spatial_index.hpp"
#include "firemarg/synth.hpp"
#include "firemarg/tuning.hpp"

using namespace firemarg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Settings {
  fs::path scratch;
  std::size_t replicates = 100;
  unsigned workers = 0;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TruthTable truth_of(const SyntheticData& s) {
  return {truth_values(s, Variable::Count), truth_values(s, Variable::BurntArea)};
}

bool rows_ok(const PredictionTable& t) {
  for (const auto& row : t.rows) {
    double prev = 0.0;
    for (double v : row.cdf) {
      if (!(v >= prev && v <= 1.0)) return false;
      prev = v;
    }
  }
  return true;
}

std::vector<double> gpd_sample(double sigma, double xi, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    double v;
    do v = 1.0 - unif(rng);
    while (v >= 1.0);
    x = sigma * (std::pow(v, -xi) - 1.0) / xi;
  }
  return out;
}

Outcome ac1_geodesy(const Settings&) {
  const double R = kDefaultEarthRadiusKm;
  std::vector<double> areas;
  for (int i = 0; i < 720; ++i)
    for (int j = 0; j < 360; ++j) areas.push_back(zone_area_km2({-179.75 + 0.5 * i, -89.75 + 0.5 * j, 0.5, 0.5}));
  const double total = pairwise_sum(areas);
  const double rel = std::abs(total / (4 * std::numbers::pi * R * R) - 1.0);

  std::vector<Observation> grid;
  for (int a = 0; a < 30; ++a)
    for (int b = 0; b < 30; ++b) {
      Observation o;
      o.index = grid.size();
      o.lon = -110.0 + 0.5 * a;
      o.lat = 30.0 + 0.5 * b;
      o.month = 6;
      o.year = 2000;
      grid.push_back(o);
    }
  const SpatialIndex index(grid, R);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lon(-112, -93), lat(28, 47), rad(0, 600);
  std::size_t mismatches = 0;
  for (int q = 0; q < 1000; ++q) {
    const LonLat c{lon(rng), lat(rng)};
    const double r = rad(rng);
    std::vector<std::size_t> brute;
    for (const auto& o : grid)
      if (haversine_km(c, {o.lon, o.lat}, R) <= r) brute.push_back(o.index);
    mismatches += index.within(c, 6, 2000, r) != brute;
  }
  return {rel < 1e-9 && mismatches == 0,
          fmt::format("tiling rel err {:.2e}; {} of 1000 queries differ from brute force", rel, mismatches)};
}

Outcome ac2_distributions(const Settings& s) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double worst_sum = 0.0;
  for (int d = 0; d < 1000; ++d) {
    const ZinbParams p{0.9 * unif(rng), std::pow(10.0, -1 + 3 * unif(rng)), std::pow(10.0, -1 + 2 * unif(rng))};
    // past the mode the pmf decays at least geometrically with ratio mu / (mu + r)
    std::vector<double> mass;
    for (std::int64_t j = 0; j < 1000000; ++j) {
      mass.push_back(zinb_pmf(p, j));
      if (j > p.mu && mass.back() < 1e-25) break;
    }
    worst_sum = std::max(worst_sum, std::abs(pairwise_sum(mass) - 1.0));
  }

  double worst_gap = 0.0;
  int mixtures = 0;
  for (int d = 0; d < 1000; ++d) {
    const double z = 0.4 * unif(rng);
    const double k2 = 0.45 + 0.5 * unif(rng);
    const double xi = -0.3 + 0.8 * unif(rng);
    const double scale = std::pow(10.0, -4.0 + 2.0 * unif(rng));
    const auto n = static_cast<std::size_t>(300 + 1000 * unif(rng));
    auto sample = gpd_sample(scale, xi, n, rng);
    for (auto& x : sample) x = std::min(x, 1.0);
    for (std::size_t k = 0; k < static_cast<std::size_t>(z * n); ++k) sample[k] = 0.0;
    const auto m = fit_mixture(sample, k2);
    if (m.kind != MixtureKind::Mixture) continue;
    ++mixtures;
    const double at = m.cdf(m.u);
    worst_gap = std::max({worst_gap, std::abs(m.cdf(std::nextafter(m.u, 2.0)) - at),
                          std::abs(at - (1.0 - m.lambda))});
  }

  SyntheticSpec spec;
  spec.lon_max = -100;
  const auto syn = synth(spec, 11);
  const auto bap = compute_bap(syn.data, spec.geo);
  PredictOptions o;
  o.workers = s.workers;
  const auto p = predict(syn.data, bap, o);
  const bool monotone = rows_ok(p.cnt) && rows_ok(p.ba) &&
                        rows_ok(benchmark_predictions(syn.data, Variable::Count)) &&
                        rows_ok(benchmark_predictions(syn.data, Variable::BurntArea));
  const std::size_t rows = p.cnt.rows.size() + p.ba.rows.size();

  return {worst_sum < 1e-10 && worst_gap < 1e-9 && mixtures >= 900 && monotone,
          fmt::format("max |sum pmf - 1| {:.1e}; max gap at u {:.1e} over {} mixture fits; {} rows {}",
                      worst_sum, worst_gap, mixtures, rows, monotone ? "monotone" : "NOT monotone")};
}

Outcome ac3_estimators(const Settings& s) {
  const ZinbParams truth{0.3, 4.0, 2.0};
  std::size_t zinb_ok = 0, gpd_ok = 0;
  for (std::size_t rep = 0; rep < s.replicates; ++rep) {
    std::mt19937_64 rng(1000 + rep);
    const std::size_t n = 2000 + (rep * 3000) / std::max<std::size_t>(1, s.replicates - 1);
    std::vector<std::int64_t> counts(n);
    for (auto& c : counts) c = sample_zinb(truth, rng);
    const auto m = fit_zinb(counts);
    zinb_ok += m.kind == CountModelKind::Zinb && std::abs(m.params.pi - 0.3) <= 0.05 &&
               std::abs(m.params.mu - 4.0) <= 0.3 && std::abs(m.params.r - 2.0) <= 0.4;

    const auto x = gpd_sample(1.0, 0.2, n, rng);
    const auto g = fit_gpd(x, 0.0);
    gpd_ok += std::abs(g.params.sigma - 1.0) <= 0.1 && std::abs(g.params.xi - 0.2) <= 0.1;
  }
  const auto need = (95 * s.replicates + 99) / 100;
  return {zinb_ok >= need && gpd_ok >= need,
          fmt::format("ZINB {}/{}, GPD {}/{} replicates within tolerance", zinb_ok, s.replicates, gpd_ok,
                      s.replicates)};
}

Outcome ac4_propriety(const Settings&) {
  const std::vector<double> u{0, 1, 2};
  std::vector<std::vector<double>> forecasts;
  for (int i = 0; i <= 20; ++i)
    for (int j = i; j <= 20; ++j)
      for (int k = j; k <= 20; ++k) forecasts.push_back({i / 20.0, j / 20.0, k / 20.0});

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> wd(0.0, 5.0);
  std::size_t truths = 0, violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ScoreConfig w{{wd(rng), wd(rng), wd(rng)}};
    for (int a = 0; a <= 20; ++a)
      for (int b = 0; a + b <= 20; ++b) {
        ++truths;
        const double p[3] = {a / 20.0, b / 20.0, (20 - a - b) / 20.0};
        const std::vector<double> cdf{p[0], p[0] + p[1], 1.0};
        auto expected = [&](const std::vector<double>& f) {
          double e = 0.0;
          for (int x = 0; x < 3; ++x) e += p[x] * score_one(f, x, u, w);
          return e;
        };
        const double at_truth = expected(cdf);
        for (const auto& f : forecasts)
          if (expected(f) < at_truth - 1e-12) {
            ++violations;
            break;
          }
      }
  }
  return {violations == 0, fmt::format("{} truths x {} forecasts, {} beaten by another forecast", truths,
                                       forecasts.size(), violations)};
}

SyntheticSpec recovery_spec() {
  SyntheticSpec spec;
  spec.missing_rate = 1e-6;
  spec.water_fraction = 0.0;
  return spec;
}

Outcome ac5_recovery(const Settings& s) {
  std::size_t ok = 0;
  std::vector<std::string> misses;
  const auto spec = recovery_spec();
  CvOptions cv;
  cv.workers = s.workers;
  for (std::size_t rep = 0; rep < s.replicates; ++rep) {
    const auto syn = synth(spec, 5000 + rep);
    const auto bap = compute_bap(syn.data, spec.geo);
    const auto sel = select_parameters(syn.data, bap, TuningGrid::defaults(),
                                       ScoreWeights::defaults(syn.data.threshold_grids()), cv);
    const bool hit = std::abs(sel.k1_cnt - 150) <= 25 && std::abs(sel.k1_bap - 150) <= 25;
    ok += hit;
    if (!hit && misses.size() < 5) misses.push_back(fmt::format("{}/{}", sel.k1_cnt, sel.k1_bap));
  }
  std::string detail = fmt::format("{}/{} replicates select both radii in [125, 175]", ok, s.replicates);
  for (const auto& m : misses) detail += " miss:" + m;
  return {ok * 100 >= 80 * s.replicates, detail};
}

RunConfig benchmark_run(std::uint64_t seed, const Settings& s) {
  RunConfig c;
  c.seed = seed;
  c.workers = s.workers;
  c.synth.lon_max = -100;
  c.output_dir = (s.scratch / "ac6").string();
  return c;
}

Outcome ac6_benchmark(const Settings& s) {
  std::size_t ok = 0;
  double worst = -1e300;
  for (std::size_t rep = 0; rep < s.replicates; ++rep) {
    const auto r = run_all(benchmark_run(100 + rep, s));
    const double m = r.scores->method.back().total, b = r.scores->benchmark.back().total;
    ok += m < b;
    worst = std::max(worst, m / b);
  }
  return {ok * 100 >= 95 * s.replicates,
          fmt::format("{}/{} replicates beat the pooled benchmark; worst ratio {:.3f}", ok, s.replicates, worst)};
}

Outcome ac7_variants(const Settings& s) {
  SyntheticSpec spec;
  spec.year_varying = true;
  spec.years.clear();
  for (int y = 2001; y <= 2013; ++y) spec.years.push_back(y);
  const auto syn = synth(spec, 77);
  const auto bap = compute_bap(syn.data, spec.geo);
  const auto weights = ScoreWeights::defaults(syn.data.threshold_grids());
  PredictOptions base;
  base.workers = s.workers;
  const auto table = variant_table(syn.data, bap, truth_of(syn), weights, TuningGrid::defaults().radii,
                                   {1, 2, 3, 4, 5, 6}, base);
  fs::create_directories(s.scratch);
  const auto csv = s.scratch / "variant_table.csv";
  std::ofstream out(csv);
  write_variant_table_csv(table, out);

  bool ok = true;
  std::string detail = fmt::format("spatial {:.1f}", table.best(0));
  for (std::size_t c = 1; c < table.columns(); ++c) {
    ok = ok && table.best(0) <= table.best(c);
    detail += fmt::format(", ky={} {:.1f}", table.year_half_widths[c - 1], table.best(c));
  }
  return {ok, detail + "; table at " + csv.string()};
}

Outcome ac8_rules(const Settings& s) {
  SyntheticSpec spec;
  spec.overlap = 0.4;
  std::size_t ok = 0;
  for (std::size_t rep = 0; rep < s.replicates; ++rep) {
    const auto syn = synth(spec, 300 + rep);
    const auto bap = compute_bap(syn.data, spec.geo);
    const auto truth = truth_of(syn);
    const auto weights = ScoreWeights::defaults(syn.data.threshold_grids());
    PredictOptions on;
    on.workers = s.workers;
    PredictOptions off = on;
    off.rules.pair = off.rules.water = false;
    const auto a = predict(syn.data, bap, on);
    const auto b = predict(syn.data, bap, off);
    const double with = score_report(syn.data, a.cnt, a.ba, truth, weights).method.back().total;
    const double without = score_report(syn.data, b.cnt, b.ba, truth, weights).method.back().total;
    ok += with < without;
  }
  return {ok * 100 >= 95 * s.replicates,
          fmt::format("{}/{} replicates score lower with deduction rules", ok, s.replicates)};
}

Outcome ac9_dependence(const Settings&) {
  const std::size_t n = 20000;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = z(rng), y[k] = z(rng);
  bool ok = true;
  std::string detail;
  for (double u : {0.9, 0.95}) {
    const double se = std::sqrt(u / static_cast<double>(n));
    const double c = chi_u(x, y, u);
    ok = ok && std::abs(c - (1 - u)) < 3 * se;
    detail += fmt::format("chi({})={:.4f} (1-u {:.2f}, 3se {:.4f}); ", u, c, 1 - u, 3 * se);
  }
  const double t = kendall_tau_b(x, x);
  bool exact = t == 1.0;
  for (double u : {0.9, 0.95}) exact = exact && chibar_u(x, x, u) == 1.0;
  return {ok && exact, detail + fmt::format("y=x: tau {} chibar {}", t, exact ? "exactly 1" : "not exactly 1")};
}

Outcome ac10_determinism(const Settings& s) {
  RunConfig c;
  const auto a = s.scratch / "ac10_a", b = s.scratch / "ac10_b", w = s.scratch / "ac10_w";
  c.workers = 1;
  c.output_dir = a.string();
  run_all(c);
  c.output_dir = b.string();
  run_all(c);
  c.workers = std::max(4u, s.workers);
  c.output_dir = w.string();
  run_all(c);
  std::vector<std::string> differ;
  for (const char* f : {"predictions_cnt.csv", "predictions_ba.csv", "scores.csv", "diagnostics.csv",
                        "manifest.json"}) {
    const auto ref = slurp(a / f);
    if (ref.empty() || ref != slurp(b / f) || ref != slurp(w / f)) differ.push_back(f);
  }
  std::string detail = differ.empty() ? "prediction, score and manifest files identical across 3 runs"
                                      : "differing:";
  for (const auto& f : differ) detail += " " + f;
  return {differ.empty(), detail};
}

struct Criterion {
  std::string id;
  std::string name;
  double limit_s;
  std::function<Outcome(const Settings&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  Settings settings;
  std::string scratch = (fs::temp_directory_path() / "firemarg_acceptance").string();
  std::vector<std::string> only;
  app.add_option("criteria", only, "subset to run, e.g. AC1 AC5");
  app.add_option("--scratch", scratch, "directory for run artifacts");
  app.add_option("--replicates", settings.replicates, "replicates for AC3, AC5, AC6, AC8")
      ->check(CLI::Range(1, 100000));
  app.add_option("--workers", settings.workers);
  CLI11_PARSE(app, argc, argv);
  settings.scratch = scratch;
  spdlog::set_level(spdlog::level::warn);

  const std::vector<Criterion> all{
      {"AC1", "geodesy", 10, ac1_geodesy},
      {"AC2", "distributions", 5, ac2_distributions},
      {"AC3", "estimators", 60, ac3_estimators},
      {"AC4", "score propriety", 10, ac4_propriety},
      {"AC5", "cv recovery", 300, ac5_recovery},
      {"AC6", "beats benchmark", 300, ac6_benchmark},
      {"AC7", "variant direction", 600, ac7_variants},
      {"AC8", "rules value", 120, ac8_rules},
      {"AC9", "dependence", 10, ac9_dependence},
      {"AC10", "determinism", 120, ac10_determinism},
  };

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(settings);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    fmt::print("{} {} {} ({:.1f}s of {:.0f}s{}) {}\n", c.id, pass ? "PASS" : "FAIL", c.name, secs, c.limit_s,
               in_time ? "" : ", over time", o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
