#pragma once

// Rank-based dependence summaries between CNT and BA, with bootstrap
// intervals, regional subsets and a linear trend check on annual means.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "firemarg/data.hpp"

namespace firemarg {

/// Tau-b with tie correction, O(n log n). Throws std::invalid_argument on a
/// length mismatch or n < 2 and std::domain_error when x or y is constant.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Mid-ranks scaled to rank / (n + 1).
std::vector<double> scaled_ranks(std::span<const double> v);

/// Pr(F_Y(Y) > u | F_X(X) > u) on scaled ranks. std::domain_error when no
/// F_X exceeds u.
double chi_u(std::span<const double> x, std::span<const double> y, double u);

/// 2 log Pr(F_Y > u) / log Pr(F_Y > u, F_X > u) - 1. std::domain_error with
/// no joint exceedance or when every F_Y exceeds u.
double chibar_u(std::span<const double> x, std::span<const double> y, double u);

using PairStatistic = std::function<double(std::span<const double>, std::span<const double>)>;

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t redraws = 0;  // resamples on which the statistic was undefined
};

/// Percentile interval from B resamples of index pairs. Replicate b draws
/// from its own generator seeded by (seed, b). A resample whose statistic
/// throws std::domain_error is redrawn, up to 100 times per replicate.
BootstrapInterval bootstrap_ci(const PairStatistic& statistic, std::span<const double> x,
                               std::span<const double> y, double level, std::size_t B,
                               std::uint64_t seed, unsigned workers = 0);

enum class Quadrant { NE, SE, SW, NW };

std::string_view to_string(Quadrant q);
/// North: lat > 37.5; east: lon > -100 (so 100W itself is west).
Quadrant quadrant_of(double lon, double lat);
/// Ids per quadrant in NE, SE, SW, NW order.
std::array<std::vector<std::size_t>, 4> quadrant_split(const Dataset& data);

struct Estimate {
  double value = 0.0;  // NaN when undefined
  double lo = 0.0;
  double hi = 0.0;
};

struct DependenceReport {
  std::string region;
  double u = 0.0;
  std::size_t n = 0;
  Estimate tau;
  Estimate chi;
  Estimate chibar;
};

struct ExploreOptions {
  std::vector<double> levels{0.9, 0.95};
  double ci_level = 0.95;
  std::size_t replicates = 200;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

/// Reports for "all" and each quadrant at each level, on rows with both CNT
/// and BA observed.
std::vector<DependenceReport> explore(const Dataset& data, const ExploreOptions& options);

void write_dependence_csv(std::span<const DependenceReport> reports, std::ostream& out);

struct TrendResult {
  std::string variable;
  std::size_t years = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  bool significant = false;  // two-sided, 5%
};

/// Least-squares line through (t, mean) pairs with a t-test on the slope.
TrendResult linear_trend(std::span<const double> t, std::span<const double> mean,
                         std::string variable = {});
/// Trend of annual means of observed CNT and BA.
std::array<TrendResult, 2> annual_trends(const Dataset& data);

void write_trend_csv(std::span<const TrendResult> trends, std::ostream& out);

}  // namespace firemarg
