#pragma once

// Predictive CDFs for every missing CNT and BA value.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "firemarg/ba_model.hpp"
#include "firemarg/count_model.hpp"
#include "firemarg/data.hpp"
#include "firemarg/geo.hpp"
#include "firemarg/neighborhoods.hpp"
#include "firemarg/rules.hpp"

namespace firemarg {

struct PredictOptions {
  NeighborhoodSpec cnt_spec{NeighborhoodVariant::Spatial, 125.0, 0, {}};
  NeighborhoodSpec ba_spec{NeighborhoodVariant::Spatial, 175.0, 0, {}};
  double k2 = 0.5;
  RuleToggles rules;  // pair/water deductions and BAP saturation
  double water_cut = kDefaultWaterCut;
  ZinbFitOptions zinb;
  MixtureOptions mixture;
  unsigned workers = 0;
};

/// One line per predicted (index, variable). Parameter slots are
/// pi, mu, r for counts and z, u, lambda, sigma, xi for burnt area.
struct FitDiagnostic {
  std::size_t index = 0;
  Variable variable = Variable::Count;
  std::size_t sample_size = 0;
  std::string model;     // zinb | mixture | empirical | benchmark | forced
  std::string fallback;  // reason for a non-parametric model, or "none"
  std::string rules;     // forced kinds applied, '+'-joined
  std::array<std::optional<double>, 5> params{};
};

struct PredictionResult {
  PredictionTable cnt;
  PredictionTable ba;
  std::vector<FitDiagnostic> diagnostics;
  std::vector<ForcedPrediction> forced;
};

/// For each missing index: neighbourhood, observed sample, model fit, CDF at
/// the count grid or at the BA grid rescaled to BAP, then rule overrides.
/// An empty sample falls back to the pooled same-month benchmark row.
PredictionResult predict(const Dataset& data, const BapView& bap, const PredictOptions& options);

/// Forced predictions enabled by the toggles, ordered by (variable, index, source).
std::vector<ForcedPrediction> collect_forced(const Dataset& data, const BapView& bap,
                                             const RuleToggles& toggles, double water_cut);

void write_diagnostics_csv(const std::vector<FitDiagnostic>& diagnostics, std::ostream& out);

}  // namespace firemarg
