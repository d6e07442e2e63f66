#pragma once

// Deterministic deductions for missing values: from the paired variable,
// from water cover, and BAP saturation at thresholds beyond the cell.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "firemarg/data.hpp"
#include "firemarg/geo.hpp"

namespace firemarg {

enum class ForcedKind {
  AllOne,      // value known to be 0: Pr(X <= u) = 1 for every u
  ZeroAtZero,  // value known to be > 0: Pr(X <= 0) = 0
  TailOne,     // BAP threshold >= 1
};

enum class RuleSource { Pair, Water, Saturation };

std::string_view to_string(ForcedKind k);
std::string_view to_string(RuleSource r);

struct ForcedPrediction {
  std::size_t index = 0;
  Variable variable = Variable::Count;
  ForcedKind kind = ForcedKind::AllOne;
  RuleSource source = RuleSource::Pair;
};

/// Missing CNT with observed BA: BA = 0 gives AllOne, BA > 0 gives ZeroAtZero;
/// symmetrically for missing BA with observed CNT. Ordered by (variable, index).
std::vector<ForcedPrediction> deduce_from_pair(const Dataset& data);

/// AllOne for each missing variable of every index with lc18 > cut (strict).
std::vector<ForcedPrediction> deduce_from_water(const Dataset& data, double cut);

/// TailOne for each missing BA index whose rescaled grid reaches 1.
std::vector<ForcedPrediction> deduce_saturation(const Dataset& data, const BapView& bap);

enum class AnomalyKind { CountWithoutArea, AreaWithoutCount };

struct PairAnomaly {
  std::size_t index;
  AnomalyKind kind;
};

/// Rows with both values observed where exactly one is zero.
std::vector<PairAnomaly> find_pair_anomalies(const Dataset& data);

/// Candidate cuts 0.50, 0.51, ..., 0.99.
std::vector<double> default_water_grid();

inline constexpr double kDefaultWaterCut = 0.94;

/// Smallest cut c in `grid` such that, among fully observed non-anomalous rows
/// with lc18 > c, the zero fraction exceeds `target` for CNT and for BA. A
/// target <= 0 is met vacuously. Returns kDefaultWaterCut when none qualifies.
double calibrate_water_cut(const Dataset& data, double target,
                           std::span<const double> grid = default_water_grid());

/// Rewrites a CDF row in place. `thresholds` are the values the row is
/// evaluated at (BAP scale for burnt area).
void apply_forced(std::span<double> row, std::span<const double> thresholds, ForcedKind kind);

struct RuleToggles {
  bool pair = true;
  bool water = true;
  bool saturation = true;
};

/// Audit log: `index,variable,kind,rule`.
void write_rule_audit_csv(std::span<const ForcedPrediction> forced, std::ostream& out);

}  // namespace firemarg
