#pragma once

// End-to-end orchestration: ingest -> rules -> tune -> predict -> score,
// with every artifact written under RunConfig::output_dir.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "firemarg/config.hpp"
#include "firemarg/predict.hpp"
#include "firemarg/scoring.hpp"
#include "firemarg/synth.hpp"
#include "firemarg/tuning.hpp"

namespace firemarg {

/// Failure inside a named stage; what() is prefixed with "[stage] ".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct Inputs {
  std::optional<SyntheticData> synthetic;
  std::optional<Dataset> ingested;
  std::optional<TruthTable> truth;  // values for the missing indices, when known

  const Dataset& data() const { return synthetic ? synthetic->data : *ingested; }
};

/// CSV from `config.input`, or a synthetic dataset from [synth] and the seed
/// when the input path is empty. Synthetic runs always carry truth.
Inputs load_inputs(const RunConfig& config);

ScoreWeights resolve_weights(const RunConfig& config, const ThresholdGrids& grids);

/// Fixed-parameter prediction options from [model] and [rules].
PredictOptions predict_options(const RunConfig& config);

struct ScoreReport {
  std::vector<ScoreSummary> method;     // cnt, ba, combined
  std::vector<ScoreSummary> benchmark;  // same order
};

ScoreReport score_report(const Dataset& data, const PredictionTable& cnt, const PredictionTable& ba,
                         const TruthTable& truth, const ScoreWeights& weights);
void write_score_report(const ScoreReport& report, std::ostream& out);

struct RunResult {
  std::filesystem::path output_dir;
  double k1_cnt = 0.0;
  double k1_ba = 0.0;
  double k2 = 0.0;
  std::optional<ScoreReport> scores;
  std::size_t forced = 0;
};

/// Runs every stage and writes dataset.csv, truth.csv (synthetic input),
/// rules_audit.csv, tuning_cnt.csv / tuning_ba.csv (when tuning),
/// predictions_cnt.csv, predictions_ba.csv, diagnostics.csv, scores.csv
/// (when truth is known) and manifest.json.
RunResult run_all(const RunConfig& config);

/// Final combined CNT+BA score against truth for each shared radius (rows)
/// and neighbourhood variant (columns: spatial, then temporal at each k_y).
struct VariantTable {
  std::vector<double> radii;
  std::vector<int> year_half_widths;
  std::vector<double> scores;  // radius-major, 1 + year_half_widths.size() columns

  std::size_t columns() const { return 1 + year_half_widths.size(); }
  double score(std::size_t r, std::size_t c) const { return scores[r * columns() + c]; }
  /// Minimum over radii for one column.
  double best(std::size_t c) const;
};

VariantTable variant_table(const Dataset& data, const BapView& bap, const TruthTable& truth,
                           const ScoreWeights& weights, const std::vector<double>& radii,
                           const std::vector<int>& year_half_widths, const PredictOptions& base);

/// `k1,spatial,ky=1,...` rows plus a final `best` row.
void write_variant_table_csv(const VariantTable& table, std::ostream& out);

}  // namespace firemarg
