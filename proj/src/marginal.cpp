#include "firemarg/marginal.hpp"

#include <algorithm>

namespace firemarg {

std::vector<double> count_cdf_row(const CountModel& model, std::span<const double> thresholds) {
  auto row = model.cdf_row(thresholds);
  make_monotone(row);
  return row;
}

std::vector<double> bap_cdf_row(const BaMixture& model, std::span<const BapThreshold> thresholds,
                                bool saturate) {
  std::vector<double> row;
  row.reserve(thresholds.size());
  for (const auto& t : thresholds) row.push_back(saturate && t.forced_one ? 1.0 : model.cdf(t.value));
  make_monotone(row);
  return row;
}

void make_monotone(std::span<double> row) {
  double prev = 0.0;
  for (double& v : row) {
    v = std::clamp(v, 0.0, 1.0);
    v = std::max(v, prev);
    prev = v;
  }
}

PooledBenchmark::PooledBenchmark(const Dataset& data, Variable v) : thresholds_(data.thresholds(v)) {
  for (const auto& o : data.observations()) {
    if (v == Variable::Count && o.cnt) by_month_[o.month].push_back(static_cast<double>(*o.cnt));
    if (v == Variable::BurntArea && o.ba) by_month_[o.month].push_back(*o.ba);
  }
  for (auto& [m, vals] : by_month_) std::sort(vals.begin(), vals.end());
}

std::vector<double> PooledBenchmark::row(int month, std::optional<double> exclude) const {
  std::vector<double> row(thresholds_.size(), 0.0);
  auto it = by_month_.find(month);
  if (it == by_month_.end()) return row;
  const auto& vals = it->second;
  const double left_out = exclude.value_or(0.0);
  const bool drop = exclude && std::binary_search(vals.begin(), vals.end(), left_out);
  const std::size_t n = vals.size() - (drop ? 1 : 0);
  if (n == 0) return row;
  for (std::size_t k = 0; k < thresholds_.size(); ++k) {
    auto c = static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), thresholds_[k]) -
                                      vals.begin());
    if (drop && left_out <= thresholds_[k]) --c;
    row[k] = static_cast<double>(c) / static_cast<double>(n);
  }
  return row;
}

}  // namespace firemarg
