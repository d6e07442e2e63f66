#include "firemarg/scoring.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "firemarg/marginal.hpp"

namespace firemarg {

ScoreConfig ScoreConfig::linear_tail(std::size_t thresholds) {
  ScoreConfig c;
  c.weights.resize(thresholds, 1.0);
  if (thresholds > 1)
    for (std::size_t k = 0; k < thresholds; ++k)
      c.weights[k] = 1.0 + 3.0 * static_cast<double>(k) / static_cast<double>(thresholds - 1);
  return c;
}

void ScoreConfig::validate(std::size_t thresholds) const {
  if (weights.size() != thresholds)
    throw std::invalid_argument(
        fmt::format("score weights: {} given for {} thresholds", weights.size(), thresholds));
  bool any = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("score weights must be finite and nonnegative");
    any |= w > 0.0;
  }
  if (!any) throw std::invalid_argument("score weights are all zero");
}

ScoreWeights ScoreWeights::defaults(const ThresholdGrids& grids) {
  return {ScoreConfig::linear_tail(grids.cnt.size()), ScoreConfig::linear_tail(grids.ba.size())};
}

void check_cdf_row(std::span<const double> row, std::size_t thresholds) {
  if (row.size() != thresholds)
    throw std::invalid_argument(
        fmt::format("CDF row has {} entries for {} thresholds", row.size(), thresholds));
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!(row[k] >= 0.0 && row[k] <= 1.0))
      throw std::invalid_argument(fmt::format("CDF value {} outside [0,1]", row[k]));
    if (k > 0 && row[k] < row[k - 1])
      throw std::invalid_argument("CDF row decreases across thresholds");
  }
}

double score_one(std::span<const double> row, double observed, std::span<const double> thresholds,
                 const ScoreConfig& config) {
  check_cdf_row(row, thresholds.size());
  if (config.weights.size() != thresholds.size())
    throw std::invalid_argument("score weights and thresholds differ in length");
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double e = (observed <= thresholds[k] ? 1.0 : 0.0) - row[k];
    s += config.weights[k] * e * e;
  }
  return s;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ScoreSummary score_set(const PredictionTable& table, std::span<const std::optional<double>> truth,
                       const ScoreConfig& config) {
  std::vector<double> parts;
  parts.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.index >= truth.size() || !truth[row.index])
      throw std::out_of_range(fmt::format("no observed value for index {}", row.index));
    parts.push_back(score_one(row.cdf, *truth[row.index], table.thresholds, config));
  }
  return {std::string(to_string(table.variable)), parts.size(), pairwise_sum(parts)};
}

ScoreSummary combine(std::span<const ScoreSummary> parts, std::string label) {
  ScoreSummary s{std::move(label), 0, 0.0};
  for (const auto& p : parts) {
    s.n += p.n;
    s.total += p.total;
  }
  return s;
}

std::vector<std::optional<double>> observed_values(const Dataset& data, Variable v) {
  std::vector<std::optional<double>> out(data.size());
  for (const auto& o : data.observations()) {
    if (v == Variable::Count) {
      if (o.cnt) out[o.index] = static_cast<double>(*o.cnt);
    } else {
      out[o.index] = o.ba;
    }
  }
  return out;
}

PredictionTable benchmark_predictions(const Dataset& data, Variable v) {
  PredictionTable table;
  table.variable = v;
  table.thresholds = data.thresholds(v);
  const PooledBenchmark pooled(data, v);
  for (std::size_t i : data.missing(v)) table.rows.push_back({i, pooled.row(data[i].month)});
  return table;
}

void write_score_csv(std::span<const ScoreSummary> summaries, std::ostream& out) {
  out << "variable,n,total,mean\n";
  for (const auto& s : summaries) fmt::print(out, "{},{},{},{}\n", s.label, s.n, s.total, s.mean());
}

}  // namespace firemarg
