#include "firemarg/neighborhoods.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "firemarg/spatial_index.hpp"

namespace firemarg {

std::string_view to_string(NeighborhoodVariant v) {
  switch (v) {
    case NeighborhoodVariant::Spatial: return "spatial";
    case NeighborhoodVariant::Temporal: return "temporal";
    case NeighborhoodVariant::Cluster: return "cluster";
  }
  return "?";
}

NeighborhoodVariant parse_variant(std::string_view s) {
  if (s == "spatial") return NeighborhoodVariant::Spatial;
  if (s == "temporal") return NeighborhoodVariant::Temporal;
  if (s == "cluster") return NeighborhoodVariant::Cluster;
  throw std::invalid_argument(fmt::format("unknown neighbourhood variant '{}'", s));
}

void NeighborhoodSpec::validate() const {
  if (!(radius_km >= 0.0) || !std::isfinite(radius_km))
    throw std::invalid_argument("neighbourhood radius must be finite and >= 0");
  if (variant == NeighborhoodVariant::Temporal && year_half_width < 1)
    throw std::invalid_argument("temporal neighbourhood needs a year half-width >= 1");
  if (variant == NeighborhoodVariant::Cluster && cluster_covariate.empty())
    throw std::invalid_argument("cluster neighbourhood needs a covariate");
}

double Covariate::value(const Observation& o) const {
  switch (kind) {
    case Kind::Altitude: return o.altitude;
    case Kind::LandCover: return o.land_cover[column];
    case Kind::Climate: return o.climate[column];
  }
  return 0.0;
}

Covariate resolve_covariate(const Dataset& data, std::string_view name) {
  if (name == "altitude") return {Covariate::Kind::Altitude, 0};
  if (auto c = data.climate_column(name)) return {Covariate::Kind::Climate, *c};
  if (name.size() > 2 && name.substr(0, 2) == "lc") {
    std::size_t k = 0;
    const auto digits = name.substr(2);
    if (std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      k = std::stoul(std::string(digits));
      if (k >= 1 && k <= kLandCoverCount) return {Covariate::Kind::LandCover, k - 1};
    }
  }
  throw std::invalid_argument(fmt::format("unknown covariate '{}'", name));
}

namespace {

void check_index(const Dataset& data, std::size_t i) {
  if (i >= data.size()) throw std::out_of_range(fmt::format("observation {} out of range", i));
}

}  // namespace

Neighborhood spatial_neighborhood(const Dataset& data, std::size_t i, double radius_km, Variable v) {
  check_index(data, i);
  const auto& o = data[i];
  return {i, data.spatial_index().within({o.lon, o.lat}, o.month, o.year, radius_km), v, false};
}

Neighborhood temporal_neighborhood(const Dataset& data, std::size_t i, double radius_km,
                                   int year_half_width, Variable v) {
  check_index(data, i);
  if (year_half_width < 0) throw std::invalid_argument("year half-width must be >= 0");
  const auto& o = data[i];
  Neighborhood n{i, {}, v, false};
  const int lo = std::max(o.year - year_half_width, data.min_year());
  const int hi = std::min(o.year + year_half_width, data.max_year());
  for (int y = lo; y <= hi; ++y)
    data.spatial_index().append_within({o.lon, o.lat}, o.month, y, radius_km, n.members);
  std::sort(n.members.begin(), n.members.end());
  return n;
}

std::optional<std::vector<int>> bisect_1d(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  if (values[order.front()] == values[order.back()]) return std::nullopt;

  // Centre first so the prefix sums stay well conditioned.
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = values[order[k]] - mean;
    s1[k + 1] = s1[k] + x;
    s2[k + 1] = s2[k] + x * x;
  }
  auto sse = [&](std::size_t a, std::size_t b) {  // over sorted positions [a, b)
    const double m = static_cast<double>(b - a);
    const double s = s1[b] - s1[a];
    return (s2[b] - s2[a]) - s * s / m;
  };
  std::size_t best_cut = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t cut = 1; cut < n; ++cut) {
    if (values[order[cut - 1]] == values[order[cut]]) continue;
    const double total = sse(0, cut) + sse(cut, n);
    if (total < best) {
      best = total;
      best_cut = cut;
    }
  }
  std::vector<int> labels(n, 1);
  for (std::size_t k = 0; k < best_cut; ++k) labels[order[k]] = 0;
  return labels;
}

Neighborhood cluster_neighborhood(const Dataset& data, std::size_t i, double radius_km,
                                  const Covariate& covariate, Variable v) {
  Neighborhood n = spatial_neighborhood(data, i, radius_km, v);
  if (n.members.size() < 2) {
    n.degenerate_split = true;
    return n;
  }
  std::vector<double> x;
  x.reserve(n.members.size());
  for (std::size_t j : n.members) x.push_back(covariate.value(data[j]));
  const double m = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / m;
  double ss = 0.0;
  for (double v2 : x) ss += (v2 - mean) * (v2 - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    n.degenerate_split = true;
    return n;
  }
  for (double& v2 : x) v2 = (v2 - mean) / sd;
  const auto labels = bisect_1d(x);
  if (!labels) {
    n.degenerate_split = true;
    return n;
  }
  // The centre is always a member of its own disc.
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(n.members.begin(), n.members.end(), i) - n.members.begin());
  const int own = (*labels)[pos];
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < n.members.size(); ++k)
    if ((*labels)[k] == own) kept.push_back(n.members[k]);
  n.members = std::move(kept);
  return n;
}

Neighborhood build_neighborhood(const Dataset& data, std::size_t i, const NeighborhoodSpec& spec,
                                Variable v) {
  switch (spec.variant) {
    case NeighborhoodVariant::Spatial: return spatial_neighborhood(data, i, spec.radius_km, v);
    case NeighborhoodVariant::Temporal:
      return temporal_neighborhood(data, i, spec.radius_km, spec.year_half_width, v);
    case NeighborhoodVariant::Cluster:
      return cluster_neighborhood(data, i, spec.radius_km,
                                  resolve_covariate(data, spec.cluster_covariate), v);
  }
  throw std::logic_error("unreachable");
}

std::vector<std::pair<double, std::size_t>> ranked_members(const Dataset& data, std::size_t i,
                                                           double radius_km, int year_lo,
                                                           int year_hi) {
  check_index(data, i);
  const auto& o = data[i];
  std::vector<std::pair<double, std::size_t>> out;
  for (int y = std::max(year_lo, data.min_year()); y <= std::min(year_hi, data.max_year()); ++y)
    data.spatial_index().append_within_distance({o.lon, o.lat}, o.month, y, radius_km, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::int64_t> count_sample(const Dataset& data, std::span<const std::size_t> members,
                                       std::optional<std::size_t> exclude) {
  std::vector<std::int64_t> out;
  out.reserve(members.size());
  for (std::size_t j : members) {
    if (exclude && j == *exclude) continue;
    if (const auto& c = data[j].cnt) out.push_back(*c);
  }
  return out;
}

std::vector<double> bap_sample(std::span<const std::optional<double>> bap,
                               std::span<const std::size_t> members,
                               std::optional<std::size_t> exclude) {
  std::vector<double> out;
  out.reserve(members.size());
  for (std::size_t j : members) {
    if (exclude && j == *exclude) continue;
    if (const auto& b = bap[j]) out.push_back(*b);
  }
  return out;
}

}  // namespace firemarg
