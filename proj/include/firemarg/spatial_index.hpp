#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "firemarg/geo.hpp"

namespace firemarg {

struct Observation;

/// Per-(month, year) buckets of observation locations sorted by latitude.
/// Range queries prefilter on a latitude band and then apply the exact
/// haversine test, so results match an all-pairs scan.
class SpatialIndex {
 public:
  SpatialIndex(std::span<const Observation> observations, double earth_radius_km);

  double earth_radius_km() const noexcept { return radius_; }

  /// Ids within `radius_km` (closed ball) of `centre` in the given slice, ascending.
  std::vector<std::size_t> within(LonLat centre, int month, int year, double radius_km) const;
  /// Appends instead of returning; output is not sorted.
  void append_within(LonLat centre, int month, int year, double radius_km,
                     std::vector<std::size_t>& out) const;
  /// Appends (distance_km, id) pairs for the same closed ball; not sorted.
  void append_within_distance(LonLat centre, int month, int year, double radius_km,
                              std::vector<std::pair<double, std::size_t>>& out) const;

  struct Nearest {
    std::size_t id;
    double distance_km;
  };

  /// Closest accepted observation in the slice. Distances within a relative
  /// 1e-12 of each other count as ties and resolve to the smaller id.
  std::optional<Nearest> nearest(LonLat centre, int month, int year,
                                 const std::function<bool(std::size_t)>& accept) const;

  /// All ids in a slice, ascending; empty when the slice does not exist.
  std::vector<std::size_t> slice_ids(int month, int year) const;

 private:
  struct Entry {
    double lat;
    double lon;
    std::size_t id;
  };
  const std::vector<Entry>* slice(int month, int year) const;
  template <class Emit>
  void scan_ball(LonLat centre, int month, int year, double radius_km, Emit&& emit) const;

  double radius_;
  std::map<std::pair<int, int>, std::vector<Entry>> slices_;
};

}  // namespace firemarg
