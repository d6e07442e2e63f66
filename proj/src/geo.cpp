#include "firemarg/geo.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace firemarg {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double haversine_km(LonLat a, LonLat b, double radius_km) {
  if (!std::isfinite(a.lon) || !std::isfinite(a.lat) || !std::isfinite(b.lon) ||
      !std::isfinite(b.lat))
    throw std::invalid_argument("haversine_km: non-finite coordinate");
  if (!(radius_km > 0.0)) throw std::invalid_argument("haversine_km: radius must be positive");
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * radius_km * std::asin(std::sqrt(h));
}

double zone_area_km2(const CellGeometry& cell, double radius_km) {
  if (!(cell.lon_width > 0.0) || !(cell.lat_height > 0.0))
    throw std::invalid_argument("zone_area_km2: cell widths must be positive");
  if (!(radius_km > 0.0)) throw std::invalid_argument("zone_area_km2: radius must be positive");
  const double lat1 = cell.lat_center - cell.lat_height / 2.0;
  const double lat2 = cell.lat_center + cell.lat_height / 2.0;
  if (lat1 < -90.0 || lat2 > 90.0)
    throw std::invalid_argument(
        fmt::format("zone_area_km2: cell [{}, {}] crosses a pole", lat1, lat2));
  const double dlambda = cell.lon_width * kDegToRad;
  return radius_km * radius_km * dlambda * (std::sin(lat2 * kDegToRad) - std::sin(lat1 * kDegToRad));
}

double to_bap(double ba, double true_area_km2, double unit_scale, double tolerance) {
  if (!(ba >= 0.0) || !std::isfinite(ba)) throw std::invalid_argument("to_bap: ba must be >= 0");
  if (!(true_area_km2 > 0.0)) throw std::invalid_argument("to_bap: true area must be positive");
  if (!(unit_scale > 0.0)) throw std::invalid_argument("to_bap: unit scale must be positive");
  const double v = ba / (true_area_km2 * unit_scale);
  if (v > 1.0) {
    if (v > 1.0 + tolerance)
      throw std::domain_error(
          fmt::format("burnt area {} exceeds cell capacity {}", ba, true_area_km2 * unit_scale));
    spdlog::warn("burnt area proportion {} clamped to 1", v);
    return 1.0;
  }
  return v;
}

std::vector<BapThreshold> bap_thresholds(std::span<const double> ba_grid, double capacity) {
  if (!(capacity > 0.0)) throw std::invalid_argument("bap_thresholds: capacity must be positive");
  std::vector<BapThreshold> out;
  out.reserve(ba_grid.size());
  for (double u : ba_grid) {
    const double v = u / capacity;
    out.push_back({v, v >= 1.0});
  }
  return out;
}

BapView compute_bap(const Dataset& data, const GeoConfig& config) {
  BapView view;
  const std::size_t n = data.size();
  view.true_area_km2.resize(n);
  view.capacity.resize(n);
  view.bap.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& o = data[i];
    CellGeometry cell{o.lon, o.lat, config.cell_lon_width, config.cell_lat_height};
    const double area = zone_area_km2(cell, config.earth_radius_km) * o.area_fraction;
    view.true_area_km2[i] = area;
    view.capacity[i] = area * config.unit_scale;
    if (o.ba) {
      try {
        view.bap[i] = to_bap(*o.ba, area, config.unit_scale, config.bap_tolerance);
      } catch (const std::domain_error& e) {
        throw DataError(i + 1, e.what());
      }
    }
  }
  return view;
}

}  // namespace firemarg
