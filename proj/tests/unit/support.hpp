#pragma once

#include <optional>
#include <vector>

#include "firemarg/data.hpp"

namespace firemarg::testing {

inline Observation obs(double lon, double lat, int month, int year,
                       std::optional<std::int64_t> cnt = 0, std::optional<double> ba = 0.0,
                       double water = 0.0) {
  Observation o;
  o.lon = lon;
  o.lat = lat;
  o.month = month;
  o.year = year;
  o.cnt = cnt;
  o.ba = ba;
  o.land_cover[kWaterLandCover] = water;
  return o;
}

inline DatasetOptions wide_options() {
  DatasetOptions opt;
  opt.season = {1, 12, 1900, 2100};
  return opt;
}

inline Dataset dataset(std::vector<Observation> rows, std::vector<std::string> climate = {}) {
  return Dataset(std::move(rows), std::move(climate), wide_options());
}

}  // namespace firemarg::testing
