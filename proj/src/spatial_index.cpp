#include "firemarg/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "firemarg/data.hpp"

namespace firemarg {

SpatialIndex::SpatialIndex(std::span<const Observation> observations, double earth_radius_km)
    : radius_(earth_radius_km) {
  for (const auto& o : observations) slices_[{o.month, o.year}].push_back({o.lat, o.lon, o.index});
  for (auto& [key, entries] : slices_) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.lat < b.lat || (a.lat == b.lat && a.id < b.id);
    });
  }
}

const std::vector<SpatialIndex::Entry>* SpatialIndex::slice(int month, int year) const {
  auto it = slices_.find({month, year});
  return it == slices_.end() ? nullptr : &it->second;
}

template <class Emit>
void SpatialIndex::scan_ball(LonLat centre, int month, int year, double radius_km, Emit&& emit) const {
  const auto* entries = slice(month, year);
  if (!entries) return;
  // Great-circle distance is at least R * |dlat|, so anything outside this
  // latitude band is out of range. The small pad absorbs rounding.
  const double band = radius_km / radius_ * 180.0 / std::numbers::pi + 1e-9;
  auto lo = std::lower_bound(entries->begin(), entries->end(), centre.lat - band,
                             [](const Entry& e, double lat) { return e.lat < lat; });
  for (auto it = lo; it != entries->end() && it->lat <= centre.lat + band; ++it) {
    const double d = haversine_km(centre, {it->lon, it->lat}, radius_);
    if (d <= radius_km) emit(d, it->id);
  }
}

void SpatialIndex::append_within(LonLat centre, int month, int year, double radius_km,
                                 std::vector<std::size_t>& out) const {
  scan_ball(centre, month, year, radius_km, [&](double, std::size_t id) { out.push_back(id); });
}

void SpatialIndex::append_within_distance(LonLat centre, int month, int year, double radius_km,
                                          std::vector<std::pair<double, std::size_t>>& out) const {
  scan_ball(centre, month, year, radius_km,
            [&](double d, std::size_t id) { out.emplace_back(d, id); });
}

std::vector<std::size_t> SpatialIndex::within(LonLat centre, int month, int year,
                                              double radius_km) const {
  std::vector<std::size_t> out;
  append_within(centre, month, year, radius_km, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<SpatialIndex::Nearest> SpatialIndex::nearest(
    LonLat centre, int month, int year, const std::function<bool(std::size_t)>& accept) const {
  const auto* entries = slice(month, year);
  if (!entries || entries->empty()) return std::nullopt;
  auto start = std::lower_bound(entries->begin(), entries->end(), centre.lat,
                                [](const Entry& e, double lat) { return e.lat < lat; });
  const double km_per_deg = radius_ * std::numbers::pi / 180.0;
  std::optional<Nearest> best;
  auto consider = [&](const Entry& e) {
    if (!accept(e.id)) return;
    const double d = haversine_km(centre, {e.lon, e.lat}, radius_);
    if (!best) {
      best = Nearest{e.id, d};
      return;
    }
    const double tol = 1e-12 * std::max(1.0, best->distance_km);
    if (d < best->distance_km - tol) {
      best = Nearest{e.id, d};
    } else if (d <= best->distance_km + tol && e.id < best->id) {
      best = Nearest{e.id, std::min(d, best->distance_km)};
    }
  };
  // Walk outwards in latitude; stop a direction once its latitude gap alone
  // exceeds the best distance found (plus tie tolerance).
  auto up = start;
  auto down = start;
  bool up_open = true, down_open = true;
  while (up_open || down_open) {
    if (up_open) {
      if (up == entries->end()) {
        up_open = false;
      } else {
        const double gap = (up->lat - centre.lat) * km_per_deg;
        if (best && gap > best->distance_km * (1.0 + 1e-9) + 1e-9) {
          up_open = false;
        } else {
          consider(*up);
          ++up;
        }
      }
    }
    if (down_open) {
      if (down == entries->begin()) {
        down_open = false;
      } else {
        auto prev = std::prev(down);
        const double gap = (centre.lat - prev->lat) * km_per_deg;
        if (best && gap > best->distance_km * (1.0 + 1e-9) + 1e-9) {
          down_open = false;
        } else {
          consider(*prev);
          down = prev;
        }
      }
    }
  }
  return best;
}

std::vector<std::size_t> SpatialIndex::slice_ids(int month, int year) const {
  std::vector<std::size_t> ids;
  if (const auto* entries = slice(month, year)) {
    ids.reserve(entries->size());
    for (const auto& e : *entries) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

}  // namespace firemarg
