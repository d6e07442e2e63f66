#pragma once

// Threshold-weighted squared CDF error and the pooled-ECDF benchmark.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "firemarg/data.hpp"

namespace firemarg {

struct ScoreConfig {
  std::vector<double> weights;

  /// w_k = 1 + 3 (k - 1) / (K - 1), k = 1..K; a single threshold gets 1.
  static ScoreConfig linear_tail(std::size_t thresholds);
  /// Nonnegative, finite, not all zero, one per threshold.
  void validate(std::size_t thresholds) const;
};

struct ScoreWeights {
  ScoreConfig cnt;
  ScoreConfig ba;

  const ScoreConfig& of(Variable v) const { return v == Variable::Count ? cnt : ba; }
  static ScoreWeights defaults(const ThresholdGrids& grids);
};

/// Throws unless the row has one entry per threshold, lies in [0,1] and is
/// non-decreasing.
void check_cdf_row(std::span<const double> row, std::size_t thresholds);

/// sum_k w_k (1{observed <= u_k} - p_k)^2.
double score_one(std::span<const double> row, double observed, std::span<const double> thresholds,
                 const ScoreConfig& config);

/// Deterministic pairwise (tree) summation.
double pairwise_sum(std::span<const double> values);

struct ScoreSummary {
  std::string label;
  std::size_t n = 0;
  double total = 0.0;
  double mean() const { return n ? total / static_cast<double>(n) : 0.0; }
};

/// Scores every row against truth[row.index]; rows sharing an index count
/// once per occurrence. Throws std::out_of_range on a missing truth.
ScoreSummary score_set(const PredictionTable& table, std::span<const std::optional<double>> truth,
                       const ScoreConfig& config);

ScoreSummary combine(std::span<const ScoreSummary> parts, std::string label = "combined");

/// Observed values per id for one variable (nullopt where missing).
std::vector<std::optional<double>> observed_values(const Dataset& data, Variable v);

/// For every missing index, the ECDF of all observed values of the same
/// month (any year, any location) on the variable's grid.
PredictionTable benchmark_predictions(const Dataset& data, Variable v);

/// `variable,n,total,mean`, one line per summary.
void write_score_csv(std::span<const ScoreSummary> summaries, std::ostream& out);

}  // namespace firemarg
