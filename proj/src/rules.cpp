#include "firemarg/rules.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <ostream>

namespace firemarg {

std::string_view to_string(ForcedKind k) {
  switch (k) {
    case ForcedKind::AllOne: return "ALL_ONE";
    case ForcedKind::ZeroAtZero: return "ZERO_AT_ZERO";
    case ForcedKind::TailOne: return "TAIL_ONE";
  }
  return "?";
}

std::string_view to_string(RuleSource r) {
  switch (r) {
    case RuleSource::Pair: return "pair";
    case RuleSource::Water: return "water";
    case RuleSource::Saturation: return "saturation";
  }
  return "?";
}

std::vector<ForcedPrediction> deduce_from_pair(const Dataset& data) {
  std::vector<ForcedPrediction> out;
  for (std::size_t i : data.missing(Variable::Count)) {
    const auto& ba = data[i].ba;
    if (!ba) continue;
    out.push_back({i, Variable::Count, *ba > 0.0 ? ForcedKind::ZeroAtZero : ForcedKind::AllOne,
                   RuleSource::Pair});
  }
  for (std::size_t i : data.missing(Variable::BurntArea)) {
    const auto& cnt = data[i].cnt;
    if (!cnt) continue;
    out.push_back({i, Variable::BurntArea, *cnt > 0 ? ForcedKind::ZeroAtZero : ForcedKind::AllOne,
                   RuleSource::Pair});
  }
  return out;
}

std::vector<ForcedPrediction> deduce_from_water(const Dataset& data, double cut) {
  std::vector<ForcedPrediction> out;
  for (Variable v : {Variable::Count, Variable::BurntArea})
    for (std::size_t i : data.missing(v))
      if (data[i].water() > cut) out.push_back({i, v, ForcedKind::AllOne, RuleSource::Water});
  return out;
}

std::vector<ForcedPrediction> deduce_saturation(const Dataset& data, const BapView& bap) {
  std::vector<ForcedPrediction> out;
  const auto& grid = data.thresholds(Variable::BurntArea);
  for (std::size_t i : data.missing(Variable::BurntArea)) {
    const auto t = bap.thresholds(i, grid);
    if (std::any_of(t.begin(), t.end(), [](const BapThreshold& b) { return b.forced_one; }))
      out.push_back({i, Variable::BurntArea, ForcedKind::TailOne, RuleSource::Saturation});
  }
  return out;
}

std::vector<PairAnomaly> find_pair_anomalies(const Dataset& data) {
  std::vector<PairAnomaly> out;
  for (const auto& o : data.observations()) {
    if (!o.cnt || !o.ba) continue;
    if (*o.cnt > 0 && *o.ba == 0.0) out.push_back({o.index, AnomalyKind::CountWithoutArea});
    if (*o.cnt == 0 && *o.ba > 0.0) out.push_back({o.index, AnomalyKind::AreaWithoutCount});
  }
  return out;
}

std::vector<double> default_water_grid() {
  std::vector<double> g;
  for (int k = 50; k <= 99; ++k) g.push_back(k / 100.0);
  return g;
}

double calibrate_water_cut(const Dataset& data, double target, std::span<const double> grid) {
  const auto anomalies = find_pair_anomalies(data);
  if (!anomalies.empty())
    spdlog::info("water-cut calibration: excluding {} anomalous CNT/BA rows", anomalies.size());
  std::vector<bool> skip(data.size(), false);
  for (const auto& a : anomalies) skip[a.index] = true;

  for (double c : grid) {
    if (target <= 0.0) return c;
    std::size_t n_cnt = 0, z_cnt = 0, n_ba = 0, z_ba = 0;
    for (const auto& o : data.observations()) {
      if (skip[o.index] || !(o.water() > c)) continue;
      if (o.cnt) {
        ++n_cnt;
        z_cnt += *o.cnt == 0;
      }
      if (o.ba) {
        ++n_ba;
        z_ba += *o.ba == 0.0;
      }
    }
    if (n_cnt == 0 || n_ba == 0) continue;
    const double f_cnt = static_cast<double>(z_cnt) / static_cast<double>(n_cnt);
    const double f_ba = static_cast<double>(z_ba) / static_cast<double>(n_ba);
    if (f_cnt > target && f_ba > target) return c;
  }
  return kDefaultWaterCut;
}

void apply_forced(std::span<double> row, std::span<const double> thresholds, ForcedKind kind) {
  if (row.size() != thresholds.size())
    throw std::invalid_argument("apply_forced: row and thresholds differ in length");
  for (std::size_t k = 0; k < row.size(); ++k) {
    switch (kind) {
      case ForcedKind::AllOne: row[k] = 1.0; break;
      case ForcedKind::ZeroAtZero:
        if (thresholds[k] <= 0.0) row[k] = 0.0;
        break;
      case ForcedKind::TailOne:
        if (thresholds[k] >= 1.0) row[k] = 1.0;
        break;
    }
  }
}

void write_rule_audit_csv(std::span<const ForcedPrediction> forced, std::ostream& out) {
  out << "index,variable,kind,rule\n";
  for (const auto& f : forced)
    fmt::print(out, "{},{},{},{}\n", f.index, to_string(f.variable), to_string(f.kind),
               to_string(f.source));
}

}  // namespace firemarg
