#include "firemarg/predict.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "firemarg/marginal.hpp"
#include "firemarg/parallel.hpp"

namespace firemarg {

std::vector<ForcedPrediction> collect_forced(const Dataset& data, const BapView& bap,
                                             const RuleToggles& toggles, double water_cut) {
  std::vector<ForcedPrediction> out;
  auto append = [&](std::vector<ForcedPrediction> f) { out.insert(out.end(), f.begin(), f.end()); };
  if (toggles.pair) append(deduce_from_pair(data));
  if (toggles.water) append(deduce_from_water(data, water_cut));
  if (toggles.saturation) append(deduce_saturation(data, bap));
  std::stable_sort(out.begin(), out.end(), [](const ForcedPrediction& a, const ForcedPrediction& b) {
    if (a.variable != b.variable) return a.variable < b.variable;
    if (a.index != b.index) return a.index < b.index;
    return a.source < b.source;
  });
  return out;
}

namespace {

struct Slot {
  std::vector<double> row;
  FitDiagnostic diag;
};

std::string join_rules(const std::vector<const ForcedPrediction*>& forced) {
  std::string s;
  for (const auto* f : forced) {
    if (!s.empty()) s += '+';
    s += fmt::format("{}:{}", to_string(f->kind), to_string(f->source));
  }
  return s.empty() ? "none" : s;
}

bool has_kind(const std::vector<const ForcedPrediction*>& forced, ForcedKind k) {
  return std::any_of(forced.begin(), forced.end(), [&](const auto* f) { return f->kind == k; });
}

}  // namespace

PredictionResult predict(const Dataset& data, const BapView& bap, const PredictOptions& options) {
  options.cnt_spec.validate();
  options.ba_spec.validate();
  if (!(options.k2 > 0.0 && options.k2 < 1.0)) throw std::invalid_argument("k2 must lie in (0,1)");

  PredictionResult result;
  result.forced = collect_forced(data, bap, options.rules, options.water_cut);
  std::unordered_map<std::size_t, std::vector<const ForcedPrediction*>> forced_cnt, forced_ba;
  for (const auto& f : result.forced)
    (f.variable == Variable::Count ? forced_cnt : forced_ba)[f.index].push_back(&f);

  const PooledBenchmark pooled_cnt(data, Variable::Count);
  const PooledBenchmark pooled_ba(data, Variable::BurntArea);
  const auto& cnt_grid = data.thresholds(Variable::Count);
  const auto& ba_grid = data.thresholds(Variable::BurntArea);
  MixtureOptions mix = options.mixture;
  mix.upper_bound = options.rules.saturation ? 1.0 : std::numeric_limits<double>::infinity();

  static const std::vector<const ForcedPrediction*> kNone;
  auto forced_for = [](const auto& map, std::size_t i) -> const std::vector<const ForcedPrediction*>& {
    auto it = map.find(i);
    return it == map.end() ? kNone : it->second;
  };

  const auto& cnt_missing = data.missing(Variable::Count);
  std::vector<Slot> cnt_slots(cnt_missing.size());
  parallel_indices(cnt_missing.size(), options.workers, [&](std::size_t k) {
    const std::size_t i = cnt_missing[k];
    const auto& forced = forced_for(forced_cnt, i);
    Slot& s = cnt_slots[k];
    s.diag.index = i;
    s.diag.variable = Variable::Count;
    s.diag.rules = join_rules(forced);
    if (has_kind(forced, ForcedKind::AllOne)) {
      s.row.assign(cnt_grid.size(), 1.0);
      s.diag.model = "forced";
      s.diag.fallback = "none";
      return;
    }
    const auto nb = build_neighborhood(data, i, options.cnt_spec, Variable::Count);
    const auto sample = count_sample(data, nb.members, i);
    s.diag.sample_size = sample.size();
    if (sample.empty()) {
      s.row = pooled_cnt.row(data[i].month);
      s.diag.model = "benchmark";
      s.diag.fallback = "empty";
    } else {
      const auto model = fit_zinb(sample, options.zinb);
      s.row = count_cdf_row(model, cnt_grid);
      s.diag.model = std::string(to_string(model.kind));
      s.diag.fallback = std::string(to_string(model.fallback));
      if (model.kind == CountModelKind::Zinb)
        s.diag.params = {model.params.pi, model.params.mu, model.params.r, std::nullopt, std::nullopt};
    }
    for (const auto* f : forced) apply_forced(s.row, cnt_grid, f->kind);
  });

  const auto& ba_missing = data.missing(Variable::BurntArea);
  std::vector<Slot> ba_slots(ba_missing.size());
  parallel_indices(ba_missing.size(), options.workers, [&](std::size_t k) {
    const std::size_t i = ba_missing[k];
    const auto& forced = forced_for(forced_ba, i);
    Slot& s = ba_slots[k];
    s.diag.index = i;
    s.diag.variable = Variable::BurntArea;
    s.diag.rules = join_rules(forced);
    if (has_kind(forced, ForcedKind::AllOne)) {
      s.row.assign(ba_grid.size(), 1.0);
      s.diag.model = "forced";
      s.diag.fallback = "none";
      return;
    }
    const auto thresholds = bap.thresholds(i, ba_grid);
    const auto nb = build_neighborhood(data, i, options.ba_spec, Variable::BurntArea);
    const auto sample = bap_sample(bap.bap, nb.members, i);
    s.diag.sample_size = sample.size();
    if (sample.empty()) {
      s.row = pooled_ba.row(data[i].month);
      s.diag.model = "benchmark";
      s.diag.fallback = "empty";
    } else {
      const auto model = fit_mixture(sample, options.k2, mix);
      s.row = bap_cdf_row(model, thresholds, options.rules.saturation);
      s.diag.model = std::string(to_string(model.kind));
      s.diag.fallback = std::string(to_string(model.fallback));
      if (model.kind == MixtureKind::Mixture)
        s.diag.params = {model.z, model.u, model.lambda, model.gpd->params.sigma,
                         model.gpd->params.xi};
    }
    // Rules act on the BAP scale, which shares the BA grid's zero.
    std::vector<double> bap_values;
    bap_values.reserve(thresholds.size());
    for (const auto& t : thresholds) bap_values.push_back(t.value);
    for (const auto* f : forced) apply_forced(s.row, bap_values, f->kind);
  });

  result.cnt.variable = Variable::Count;
  result.cnt.thresholds = cnt_grid;
  result.ba.variable = Variable::BurntArea;
  result.ba.thresholds = ba_grid;
  for (auto& s : cnt_slots) {
    result.cnt.rows.push_back({s.diag.index, std::move(s.row)});
    result.diagnostics.push_back(std::move(s.diag));
  }
  for (auto& s : ba_slots) {
    result.ba.rows.push_back({s.diag.index, std::move(s.row)});
    result.diagnostics.push_back(std::move(s.diag));
  }
  result.cnt.validate();
  result.ba.validate();
  return result;
}

void write_diagnostics_csv(const std::vector<FitDiagnostic>& diagnostics, std::ostream& out) {
  out << "index,variable,sample_size,model,fallback,rules,p1,p2,p3,p4,p5\n";
  for (const auto& d : diagnostics) {
    fmt::print(out, "{},{},{},{},{},{}", d.index, to_string(d.variable), d.sample_size, d.model,
               d.fallback, d.rules);
    for (const auto& p : d.params) {
      if (p) fmt::print(out, ",{}", *p);
      else out << ',';
    }
    out << '\n';
  }
}

}  // namespace firemarg
