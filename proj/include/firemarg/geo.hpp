#pragma once

// Great-circle distance, spherical-zone cell areas and the burnt-area
// proportion (BAP) rescaling.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "firemarg/data.hpp"

namespace firemarg {

inline constexpr double kAcresPerKm2 = 247.105381;

struct LonLat {
  double lon;
  double lat;
};

/// Haversine distance in km between two (lon, lat) points given in degrees.
double haversine_km(LonLat a, LonLat b, double radius_km = kDefaultEarthRadiusKm);

struct CellGeometry {
  double lon_center = 0.0;
  double lat_center = 0.0;
  double lon_width = 0.5;
  double lat_height = 0.5;
};

/// Area of the lon/lat rectangle on the sphere, R^2 * dlon * (sin lat2 - sin lat1).
/// Throws when the cell extends past a pole.
double zone_area_km2(const CellGeometry& cell, double radius_km = kDefaultEarthRadiusKm);

struct GeoConfig {
  double earth_radius_km = kDefaultEarthRadiusKm;
  double cell_lon_width = 0.5;
  double cell_lat_height = 0.5;
  double unit_scale = kAcresPerKm2;  // BA units per km^2
  double bap_tolerance = 1e-9;       // relative excess over 1 accepted as rounding
};

/// BA / (trueArea * unitScale). Values above 1 within the relative tolerance
/// are clamped to 1 with a warning; larger excess throws.
double to_bap(double ba, double true_area_km2, double unit_scale = kAcresPerKm2,
              double tolerance = 1e-9);

struct BapThreshold {
  double value;
  bool forced_one;  // value >= 1, so Pr(BAP <= value) = 1
};

/// Rescales a BA grid by a cell capacity (true area * unit scale, in BA units).
std::vector<BapThreshold> bap_thresholds(std::span<const double> ba_grid, double capacity);

/// Per-observation cell geometry and BAP values for a dataset.
struct BapView {
  std::vector<double> true_area_km2;
  std::vector<double> capacity;  // BA units
  std::vector<std::optional<double>> bap;

  std::vector<BapThreshold> thresholds(std::size_t i, std::span<const double> ba_grid) const {
    return bap_thresholds(ba_grid, capacity[i]);
  }
};

BapView compute_bap(const Dataset& data, const GeoConfig& config);

}  // namespace firemarg
