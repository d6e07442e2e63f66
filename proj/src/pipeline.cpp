#include "firemarg/pipeline.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace firemarg {

StageError::StageError(std::string stage, const std::string& what)
    : std::runtime_error(fmt::format("[{}] {}", stage, what)), stage_(std::move(stage)) {}

namespace {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  spdlog::info("stage {}", name);
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const DataError& e) {
    throw StageError(name, fmt::format("row {}: {}", e.row(), e.what()));
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", p.string()));
}

}  // namespace

Inputs load_inputs(const RunConfig& config) {
  Inputs in;
  if (config.input.empty()) {
    SyntheticSpec spec = config.synth;
    spec.geo = config.geo;
    in.synthetic = synth(spec, config.seed);
    auto& s = *in.synthetic;
    if (s.data.threshold_grids().cnt != config.thresholds.cnt ||
        s.data.threshold_grids().ba != config.thresholds.ba) {
      DatasetOptions o = s.data.options();
      o.thresholds = config.thresholds;
      s.data = Dataset(s.data.observations(), s.data.climate_names(), o);
    }
    in.truth = TruthTable{truth_values(s, Variable::Count), truth_values(s, Variable::BurntArea)};
    spdlog::info("synthetic dataset: {} observations, {} hotspots", s.data.size(), s.hotspots.size());
  } else {
    in.ingested = ingest_csv(config.input, ColumnSchema{}, config.dataset_options());
    spdlog::info("ingested {} observations from {}", in.ingested->size(), config.input);
  }
  if (!config.truth.empty()) {
    std::ifstream f(config.truth);
    if (!f) throw std::runtime_error(fmt::format("cannot open truth '{}'", config.truth));
    in.truth = read_truth_csv(f, in.data().size());
  }
  return in;
}

ScoreWeights resolve_weights(const RunConfig& config, const ThresholdGrids& grids) {
  return config.weights.empty() ? ScoreWeights::defaults(grids) : load_weights(config.weights, grids);
}

PredictOptions predict_options(const RunConfig& config) {
  PredictOptions o;
  o.cnt_spec = config.spec(Variable::Count);
  o.ba_spec = config.spec(Variable::BurntArea);
  o.k2 = config.k2;
  o.rules = config.rules;
  o.water_cut = config.water_cut;
  o.workers = config.workers;
  return o;
}

ScoreReport score_report(const Dataset& data, const PredictionTable& cnt, const PredictionTable& ba,
                         const TruthTable& truth, const ScoreWeights& weights) {
  ScoreReport r;
  auto add = [&](std::vector<ScoreSummary>& into, const PredictionTable& c, const PredictionTable& b,
                 const std::string& prefix) {
    auto sc = score_set(c, truth.cnt, weights.cnt);
    auto sb = score_set(b, truth.ba, weights.ba);
    sc.label = prefix + "cnt";
    sb.label = prefix + "ba";
    const ScoreSummary parts[] = {sc, sb};
    into = {sc, sb, combine(parts, prefix + "combined")};
  };
  add(r.method, cnt, ba, "");
  add(r.benchmark, benchmark_predictions(data, Variable::Count),
      benchmark_predictions(data, Variable::BurntArea), "benchmark_");
  return r;
}

void write_score_report(const ScoreReport& report, std::ostream& out) {
  std::vector<ScoreSummary> all = report.method;
  all.insert(all.end(), report.benchmark.begin(), report.benchmark.end());
  write_score_csv(all, out);
}

RunResult run_all(const RunConfig& config) {
  stage("config", [&] { config.validate(); });
  RunResult result;
  result.output_dir = config.output_dir;
  const std::filesystem::path dir = config.output_dir;
  stage("setup", [&] { std::filesystem::create_directories(dir); });

  std::map<std::string, std::string> outputs;  // file -> sha256
  auto emit = [&](const std::string& name, auto&& writer) {
    std::ostringstream out;
    writer(out);
    write_file(dir / name, out.str());
    outputs[name] = sha256_hex(out.str());
  };

  const Inputs inputs = stage("ingest", [&] {
    Inputs in = load_inputs(config);
    emit("dataset.csv", [&](std::ostream& o) { write_dataset_csv(in.data(), o); });
    if (in.synthetic) emit("truth.csv", [&](std::ostream& o) { write_truth_csv(*in.synthetic, o); });
    return in;
  });
  const Dataset& data = inputs.data();
  const ScoreWeights weights = stage("weights", [&] { return resolve_weights(config, data.threshold_grids()); });
  const BapView bap = stage("bap", [&] { return compute_bap(data, config.geo); });

  PredictOptions options = predict_options(config);
  stage("rules", [&] {
    if (config.calibrate_water) {
      options.water_cut = calibrate_water_cut(data, config.water_target);
      spdlog::info("calibrated water cut {}", options.water_cut);
    }
    const auto forced = collect_forced(data, bap, options.rules, options.water_cut);
    result.forced = forced.size();
    emit("rules_audit.csv", [&](std::ostream& o) { write_rule_audit_csv(forced, o); });
  });

  stage("tune", [&] {
    if (!config.tune) return;
    CvOptions cv;
    cv.workers = config.workers;
    NeighborhoodSpec base = config.spec(Variable::Count);
    const auto sel = select_parameters(data, bap, config.grid, weights, cv, base);
    options.cnt_spec.radius_km = sel.k1_cnt;
    options.ba_spec.radius_km = sel.k1_bap;
    options.k2 = sel.k2_bap;
    emit("tuning_cnt.csv", [&](std::ostream& o) { write_cv_table_csv(sel.cnt, o); });
    emit("tuning_ba.csv", [&](std::ostream& o) { write_cv_table_csv(sel.ba, o); });
    spdlog::info("selected k1_cnt={} k1_ba={} k2={}", sel.k1_cnt, sel.k1_bap, sel.k2_bap);
  });
  result.k1_cnt = options.cnt_spec.radius_km;
  result.k1_ba = options.ba_spec.radius_km;
  result.k2 = options.k2;

  const PredictionResult pred = stage("predict", [&] {
    auto p = predict(data, bap, options);
    emit("predictions_cnt.csv", [&](std::ostream& o) { write_predictions_csv(p.cnt, o); });
    emit("predictions_ba.csv", [&](std::ostream& o) { write_predictions_csv(p.ba, o); });
    emit("diagnostics.csv", [&](std::ostream& o) { write_diagnostics_csv(p.diagnostics, o); });
    return p;
  });

  stage("score", [&] {
    if (!inputs.truth) {
      spdlog::info("no truth available; scoring skipped");
      return;
    }
    result.scores = score_report(data, pred.cnt, pred.ba, *inputs.truth, weights);
    emit("scores.csv", [&](std::ostream& o) { write_score_report(*result.scores, o); });
    spdlog::info("total score {} (benchmark {})", result.scores->method[2].total,
                 result.scores->benchmark[2].total);
  });

  stage("manifest", [&] {
    nlohmann::ordered_json m;
    nlohmann::ordered_json cfg;
    std::istringstream dump(dump_config(config, false));
    std::string line, section;
    while (std::getline(dump, line)) {
      if (line.empty()) continue;
      if (line.front() == '[') {
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find(" = ");
      cfg[section][line.substr(0, eq)] = line.substr(eq + 3);
    }
    m["config"] = cfg;
    m["config_sha256"] = config_hash(config);
    m["seed"] = config.seed;
    m["selected"] = {{"k1_cnt", result.k1_cnt}, {"k1_ba", result.k1_ba}, {"k2", result.k2},
                     {"water_cut", options.water_cut}};
    m["counts"] = {{"observations", data.size()},
                   {"missing_cnt", data.missing(Variable::Count).size()},
                   {"missing_ba", data.missing(Variable::BurntArea).size()},
                   {"forced", result.forced}};
    nlohmann::ordered_json files;
    for (const auto& [name, hash] : outputs) files[name] = hash;
    m["outputs"] = files;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
  });
  return result;
}

double VariantTable::best(std::size_t c) const {
  double b = score(0, c);
  for (std::size_t r = 1; r < radii.size(); ++r) b = std::min(b, score(r, c));
  return b;
}

VariantTable variant_table(const Dataset& data, const BapView& bap, const TruthTable& truth,
                           const ScoreWeights& weights, const std::vector<double>& radii,
                           const std::vector<int>& year_half_widths, const PredictOptions& base) {
  if (radii.empty()) throw std::invalid_argument("variant_table needs at least one radius");
  VariantTable t{radii, year_half_widths, {}};
  for (double r : radii) {
    for (std::size_t c = 0; c < t.columns(); ++c) {
      PredictOptions o = base;
      const NeighborhoodSpec s = c == 0 ? NeighborhoodSpec{NeighborhoodVariant::Spatial, r, 0, {}}
                                        : NeighborhoodSpec{NeighborhoodVariant::Temporal, r,
                                                           year_half_widths[c - 1], {}};
      o.cnt_spec = s;
      o.ba_spec = s;
      const auto p = predict(data, bap, o);
      const auto sc = score_set(p.cnt, truth.cnt, weights.cnt);
      const auto sb = score_set(p.ba, truth.ba, weights.ba);
      t.scores.push_back(sc.total + sb.total);
    }
  }
  return t;
}

void write_variant_table_csv(const VariantTable& table, std::ostream& out) {
  out << "k1,spatial";
  for (int ky : table.year_half_widths) fmt::print(out, ",ky={}", ky);
  out << '\n';
  for (std::size_t r = 0; r < table.radii.size(); ++r) {
    fmt::print(out, "{}", table.radii[r]);
    for (std::size_t c = 0; c < table.columns(); ++c) fmt::print(out, ",{:.3f}", table.score(r, c));
    out << '\n';
  }
  out << "best";
  for (std::size_t c = 0; c < table.columns(); ++c) fmt::print(out, ",{:.3f}", table.best(c));
  out << '\n';
}

}  // namespace firemarg
