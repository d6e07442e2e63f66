#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "firemarg/config.hpp"
#include "firemarg/dependence.hpp"
#include "firemarg/pipeline.hpp"

namespace fm = firemarg;

namespace {

struct Overrides {
  std::string config_path;
  std::string input;
  std::string output;
  std::string weights;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool no_rules = false;
  bool no_tune = false;
  std::optional<std::string> variant;
  std::optional<double> k1;
  std::optional<double> k2;
  std::optional<int> ky;
  std::string log_level = "info";
};

fm::RunConfig resolve(const Overrides& o) {
  fm::RunConfig c = o.config_path.empty() ? fm::RunConfig{} : fm::load_config(o.config_path);
  if (!o.input.empty()) c.input = o.input;
  if (!o.output.empty()) c.output_dir = o.output;
  if (!o.weights.empty()) c.weights = o.weights;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.no_rules) c.rules.pair = c.rules.water = false;
  if (o.variant) c.variant = fm::parse_variant(*o.variant);
  // explicit parameters replace tuning
  if (o.k1) c.k1_cnt = c.k1_ba = *o.k1;
  if (o.k2) c.k2 = *o.k2;
  if (o.ky) c.ky = *o.ky;
  if (o.no_tune || o.k1 || o.k2) c.tune = false;
  c.explore.seed = c.seed;
  c.explore.workers = c.workers;
  c.synth.geo = c.geo;
  return c;
}

void write_to(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
  out << text;
}

template <typename Writer>
void emit(const fm::RunConfig& c, const std::string& name, Writer&& w) {
  std::filesystem::create_directories(c.output_dir);
  std::ostringstream out;
  w(out);
  const auto path = std::filesystem::path(c.output_dir) / name;
  write_to(path, out.str());
  spdlog::info("wrote {}", path.string());
}

void summarize(const fm::Dataset& d) {
  fmt::print("observations {}\nmissing_cnt {}\nmissing_ba {}\nyears {}-{}\n", d.size(),
             d.missing(fm::Variable::Count).size(), d.missing(fm::Variable::BurntArea).size(),
             d.min_year(), d.max_year());
}

void write_data(const fm::RunConfig& c, const fm::Inputs& in) {
  emit(c, "dataset.csv", [&](std::ostream& o) { fm::write_dataset_csv(in.data(), o); });
  if (in.synthetic) emit(c, "truth.csv", [&](std::ostream& o) { fm::write_truth_csv(*in.synthetic, o); });
}

int cmd_ingest(const fm::RunConfig& c) {
  c.validate();
  const auto in = fm::load_inputs(c);
  write_data(c, in);
  summarize(in.data());
  const auto anomalies = fm::find_pair_anomalies(in.data());
  if (!anomalies.empty()) fmt::print("pair_anomalies {}\n", anomalies.size());
  return 0;
}

int cmd_synth(fm::RunConfig c) {
  c.input.clear();
  return cmd_ingest(c);
}

int cmd_explore(const fm::RunConfig& c) {
  c.validate();
  const auto in = fm::load_inputs(c);
  const auto reports = fm::explore(in.data(), c.explore);
  emit(c, "dependence.csv", [&](std::ostream& o) { fm::write_dependence_csv(reports, o); });
  const auto trends = fm::annual_trends(in.data());
  emit(c, "trends.csv", [&](std::ostream& o) { fm::write_trend_csv(trends, o); });
  for (const auto& r : reports)
    fmt::print("{} u={} n={} tau={:.4f} chi={:.4f} chibar={:.4f}\n", r.region, r.u, r.n, r.tau.value,
               r.chi.value, r.chibar.value);
  return 0;
}

int cmd_tune(const fm::RunConfig& c) {
  c.validate();
  c.grid.validate();
  const auto in = fm::load_inputs(c);
  const auto& d = in.data();
  const auto bap = fm::compute_bap(d, c.geo);
  fm::CvOptions cv;
  cv.workers = c.workers;
  const auto sel = fm::select_parameters(d, bap, c.grid, fm::resolve_weights(c, d.threshold_grids()), cv,
                                         c.spec(fm::Variable::Count));
  emit(c, "tuning_cnt.csv", [&](std::ostream& o) { fm::write_cv_table_csv(sel.cnt, o); });
  emit(c, "tuning_ba.csv", [&](std::ostream& o) { fm::write_cv_table_csv(sel.ba, o); });
  fmt::print("k1_cnt {}\nk1_ba {}\nk2 {}\n", sel.k1_cnt, sel.k1_bap, sel.k2_bap);
  return 0;
}

int cmd_predict(const fm::RunConfig& c) {
  c.validate();
  const auto in = fm::load_inputs(c);
  const auto& d = in.data();
  const auto bap = fm::compute_bap(d, c.geo);
  const auto p = fm::predict(d, bap, fm::predict_options(c));
  emit(c, "predictions_cnt.csv", [&](std::ostream& o) { fm::write_predictions_csv(p.cnt, o); });
  emit(c, "predictions_ba.csv", [&](std::ostream& o) { fm::write_predictions_csv(p.ba, o); });
  emit(c, "diagnostics.csv", [&](std::ostream& o) { fm::write_diagnostics_csv(p.diagnostics, o); });
  emit(c, "rules_audit.csv", [&](std::ostream& o) { fm::write_rule_audit_csv(p.forced, o); });
  fmt::print("predicted_cnt {}\npredicted_ba {}\nforced {}\n", p.cnt.rows.size(), p.ba.rows.size(),
             p.forced.size());
  return 0;
}

int cmd_score(const fm::RunConfig& c) {
  c.validate();
  const auto in = fm::load_inputs(c);
  if (!in.truth) throw std::runtime_error("no truth: set [paths] truth or use synthetic input");
  const auto read = [&](const char* name, fm::Variable v) {
    const auto path = std::filesystem::path(c.output_dir) / name;
    std::ifstream f(path);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    return fm::read_predictions_csv(f, v);
  };
  const auto cnt = read("predictions_cnt.csv", fm::Variable::Count);
  const auto ba = read("predictions_ba.csv", fm::Variable::BurntArea);
  const auto report =
      fm::score_report(in.data(), cnt, ba, *in.truth, fm::resolve_weights(c, in.data().threshold_grids()));
  emit(c, "scores.csv", [&](std::ostream& o) { fm::write_score_report(report, o); });
  fm::write_score_report(report, std::cout);
  return 0;
}

int cmd_run(const fm::RunConfig& c) {
  const auto r = fm::run_all(c);
  fmt::print("output {}\nk1_cnt {}\nk1_ba {}\nk2 {}\nforced {}\n", r.output_dir.string(), r.k1_cnt,
             r.k1_ba, r.k2, r.forced);
  if (r.scores) fm::write_score_report(*r.scores, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive distributions for missing wildfire counts and burnt areas"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--input", o.input, "dataset CSV (default: synthetic data)");
  app.add_option("--output", o.output, "output directory");
  app.add_option("--weights", o.weights, "threshold weights CSV")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--workers", o.workers, "worker threads (0: all cores)");
  app.add_flag("--no-rules", o.no_rules, "disable the CNT/BA pair and water deductions");
  app.add_flag("--no-tune", o.no_tune, "use [model] parameters without cross-validation");
  app.add_option("--variant", o.variant, "neighbourhood variant")
      ->check(CLI::IsMember({"spatial", "temporal", "cluster"}));
  app.add_option("--k1", o.k1, "neighbourhood radius in km for both variables");
  app.add_option("--k2", o.k2, "non-exceedance level of the GPD threshold");
  app.add_option("--ky", o.ky, "year half-width of the temporal variant");
  app.add_option("--log-level", o.log_level, "trace|debug|info|warn|error|off");

  auto* c_ingest = app.add_subcommand("ingest", "validate the input and write dataset.csv");
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset with truth");
  auto* c_explore = app.add_subcommand("explore", "dependence measures and annual trends");
  auto* c_tune = app.add_subcommand("tune", "cross-validate k1 and k2");
  auto* c_predict = app.add_subcommand("predict", "predict with fixed parameters");
  auto* c_score = app.add_subcommand("score", "score predictions in the output directory");
  auto* c_run = app.add_subcommand("run", "every stage, with manifest");
  auto* c_config = app.add_subcommand("config", "print the effective configuration");
  bool defaults = false;
  c_config->add_flag("--defaults", defaults, "print built-in defaults instead");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("firemarg"));
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    if (c_config->parsed()) {
      fmt::print("{}", fm::dump_config(defaults ? fm::RunConfig{} : resolve(o)));
      return 0;
    }
    const auto cfg = resolve(o);
    if (c_ingest->parsed()) return cmd_ingest(cfg);
    if (c_synth->parsed()) return cmd_synth(cfg);
    if (c_explore->parsed()) return cmd_explore(cfg);
    if (c_tune->parsed()) return cmd_tune(cfg);
    if (c_predict->parsed()) return cmd_predict(cfg);
    if (c_score->parsed()) return cmd_score(cfg);
    if (c_run->parsed()) return cmd_run(cfg);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}
