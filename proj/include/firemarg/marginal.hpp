#pragma once

// Fit-and-evaluate helpers shared by prediction and cross-validation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "firemarg/ba_model.hpp"
#include "firemarg/count_model.hpp"
#include "firemarg/data.hpp"
#include "firemarg/geo.hpp"

namespace firemarg {

/// ZINB (or fallback) CDF row at the count thresholds.
std::vector<double> count_cdf_row(const CountModel& model, std::span<const double> thresholds);

/// Mixture CDF row at rescaled thresholds; entries flagged forced_one are 1
/// when `saturate` is set.
std::vector<double> bap_cdf_row(const BaMixture& model, std::span<const BapThreshold> thresholds,
                                bool saturate = true);

/// Running max, clamped to [0,1].
void make_monotone(std::span<double> row);

/// Same-month ECDF of every observed value of one variable, pooled over
/// years and locations. Rows can leave one value out.
class PooledBenchmark {
 public:
  PooledBenchmark(const Dataset& data, Variable v);

  bool has_month(int month) const { return by_month_.count(month) > 0; }
  /// ECDF at the variable's thresholds; `exclude` removes one copy of that
  /// value. Months with no data (or nothing left) give an all-zero row.
  std::vector<double> row(int month, std::optional<double> exclude = std::nullopt) const;

 private:
  std::vector<double> thresholds_;
  std::map<int, std::vector<double>> by_month_;  // sorted values
};

}  // namespace firemarg
