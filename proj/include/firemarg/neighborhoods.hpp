#pragma once

// Pooling sets: same-month/year discs (spatial), discs over a window of
// years (temporal) and discs cut by a one-covariate two-cluster split.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "firemarg/data.hpp"

namespace firemarg {

enum class NeighborhoodVariant { Spatial, Temporal, Cluster };

std::string_view to_string(NeighborhoodVariant v);
NeighborhoodVariant parse_variant(std::string_view s);

struct NeighborhoodSpec {
  NeighborhoodVariant variant = NeighborhoodVariant::Spatial;
  double radius_km = 0.0;
  int year_half_width = 0;        // temporal only, >= 1
  std::string cluster_covariate;  // cluster only

  void validate() const;
};

struct Neighborhood {
  std::size_t center = 0;
  std::vector<std::size_t> members;  // ascending ids, missing values included
  Variable variable = Variable::Count;
  bool degenerate_split = false;     // cluster only: no split was possible
};

/// A covariate resolved against a dataset: "altitude", "lc1".."lc18" or a
/// climate column name.
struct Covariate {
  enum class Kind { Altitude, LandCover, Climate } kind = Kind::Altitude;
  std::size_t column = 0;

  double value(const Observation& o) const;
};

Covariate resolve_covariate(const Dataset& data, std::string_view name);

/// { j : haversine(s_i, s_j) <= radius, m_j = m_i, y_j = y_i }.
Neighborhood spatial_neighborhood(const Dataset& data, std::size_t i, double radius_km,
                                  Variable v = Variable::Count);

/// Spatial criterion over years y_i - k_y .. y_i + k_y, truncated to the
/// data's year range. k_y = 0 reduces to the spatial neighbourhood.
Neighborhood temporal_neighborhood(const Dataset& data, std::size_t i, double radius_km,
                                   int year_half_width, Variable v = Variable::Count);

/// Spatial neighbourhood restricted to i's side of the best two-cluster split
/// of the standardised covariate. Fewer than two members or zero spread
/// leaves the set unchanged with degenerate_split set.
Neighborhood cluster_neighborhood(const Dataset& data, std::size_t i, double radius_km,
                                  const Covariate& covariate, Variable v = Variable::Count);

Neighborhood build_neighborhood(const Dataset& data, std::size_t i, const NeighborhoodSpec& spec,
                                Variable v);

/// Exact minimum within-cluster sum-of-squares split of 1-D values into two
/// non-empty groups, cutting only between distinct values. Returns labels
/// (0 = lower group) or nullopt when fewer than two distinct values exist.
/// Ties in the objective go to the lowest cut.
std::optional<std::vector<int>> bisect_1d(std::span<const double> values);

/// (distance_km, id) pairs within `radius_km` over years [year_lo, year_hi] of
/// i's month, sorted by (distance, id). Prefixes give the nested discs of
/// every smaller radius.
std::vector<std::pair<double, std::size_t>> ranked_members(const Dataset& data, std::size_t i,
                                                           double radius_km, int year_lo,
                                                           int year_hi);

/// Non-missing values of the members, skipping `exclude`; order follows members.
std::vector<std::int64_t> count_sample(const Dataset& data, std::span<const std::size_t> members,
                                       std::optional<std::size_t> exclude = std::nullopt);
std::vector<double> bap_sample(std::span<const std::optional<double>> bap,
                               std::span<const std::size_t> members,
                               std::optional<std::size_t> exclude = std::nullopt);

}  // namespace firemarg
