#include "firemarg/data.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "firemarg/spatial_index.hpp"

namespace firemarg {

std::string_view to_string(Variable v) { return v == Variable::Count ? "cnt" : "ba"; }

Variable parse_variable(std::string_view s) {
  if (s == "cnt" || s == "count" || s == "CNT") return Variable::Count;
  if (s == "ba" || s == "bap" || s == "BA" || s == "BAP") return Variable::BurntArea;
  throw std::invalid_argument(fmt::format("unknown variable '{}'", s));
}

ThresholdGrids default_thresholds() {
  ThresholdGrids g;
  for (int u = 0; u <= 10; ++u) g.cnt.push_back(u);
  for (int u = 12; u <= 30; u += 2) g.cnt.push_back(u);
  for (int u = 40; u <= 100; u += 10) g.cnt.push_back(u);

  g.ba = {0, 1};
  for (int u = 10; u <= 100; u += 10) g.ba.push_back(u);
  for (double u : {150, 200, 250, 300, 400, 500, 1000, 1500, 2000, 5000, 10000, 20000, 30000,
                   40000, 50000, 100000})
    g.ba.push_back(u);
  return g;
}

DataError::DataError(std::size_t row, const std::string& what)
    : std::runtime_error(fmt::format("row {}: {}", row, what)), row_(row) {}

namespace {

void check_grid(const std::vector<double>& grid, std::string_view name) {
  if (grid.empty()) throw std::invalid_argument(fmt::format("{} threshold grid is empty", name));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1]))
      throw std::invalid_argument(fmt::format("{} threshold grid is not strictly increasing", name));
  }
}

void check_observation(const Observation& o, const SeasonRange& season, std::size_t row) {
  if (!std::isfinite(o.lon) || !std::isfinite(o.lat)) throw DataError(row, "non-finite coordinate");
  if (o.lat < -90.0 || o.lat > 90.0) throw DataError(row, "latitude out of range");
  if (!(o.area_fraction > 0.0 && o.area_fraction <= 1.0))
    throw DataError(row, fmt::format("area fraction {} outside (0,1]", o.area_fraction));
  if (o.month < season.first_month || o.month > season.last_month)
    throw DataError(row, fmt::format("month {} outside season", o.month));
  if (o.year < season.first_year || o.year > season.last_year)
    throw DataError(row, fmt::format("year {} outside configured range", o.year));
  if (o.cnt && *o.cnt < 0) throw DataError(row, "negative count");
  if (o.ba && !(std::isfinite(*o.ba) && *o.ba >= 0.0)) throw DataError(row, "invalid burnt area");
  for (double lc : o.land_cover) {
    if (!(lc >= 0.0 && lc <= 1.0)) throw DataError(row, "land cover fraction outside [0,1]");
  }
}

}  // namespace

Dataset::Dataset(std::vector<Observation> observations, std::vector<std::string> climate_names,
                 DatasetOptions options)
    : obs_(std::move(observations)),
      climate_names_(std::move(climate_names)),
      options_(std::move(options)) {
  check_grid(options_.thresholds.cnt, "count");
  check_grid(options_.thresholds.ba, "burnt area");
  if (!(options_.earth_radius_km > 0.0)) throw std::invalid_argument("earth radius must be positive");

  std::set<std::tuple<double, double, int, int>> keys;
  min_year_ = obs_.empty() ? 0 : obs_.front().year;
  max_year_ = min_year_;
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    Observation& o = obs_[i];
    o.index = i;
    check_observation(o, options_.season, i + 1);
    if (!climate_names_.empty() && o.climate.size() != climate_names_.size())
      throw DataError(i + 1, "climate covariate count does not match header");
    if (!keys.emplace(o.lon, o.lat, o.month, o.year).second)
      throw DataError(i + 1, fmt::format("duplicate (lon,lat,month,year) = ({},{},{},{})", o.lon,
                                         o.lat, o.month, o.year));
    if (o.missing(Variable::Count)) cnt_missing_.push_back(i);
    if (o.missing(Variable::BurntArea)) ba_missing_.push_back(i);
    min_year_ = std::min(min_year_, o.year);
    max_year_ = std::max(max_year_, o.year);
  }
  index_ = std::make_shared<const SpatialIndex>(obs_, options_.earth_radius_km);
}

std::optional<std::size_t> Dataset::climate_column(std::string_view name) const {
  auto it = std::find(climate_names_.begin(), climate_names_.end(), name);
  if (it == climate_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - climate_names_.begin());
}

bool is_missing_token(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  return field.empty() || field == "NA";
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

double parse_double(std::string_view f, std::size_t row, std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size())
    throw DataError(row, fmt::format("cannot parse '{}' in column {}", f, column));
  return v;
}

std::int64_t parse_int(std::string_view f, std::size_t row, std::string_view column) {
  // Accept integral values written with a decimal point ("3.0").
  double v = parse_double(f, row, column);
  if (!std::isfinite(v) || v != std::floor(v))
    throw DataError(row, fmt::format("expected integer in column {}, got '{}'", column, f));
  return static_cast<std::int64_t>(v);
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

}  // namespace

Dataset ingest_csv(const std::filesystem::path& path, const ColumnSchema& schema,
                   DatasetOptions options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return ingest_csv(in, schema, std::move(options));
}

Dataset ingest_csv(std::istream& in, const ColumnSchema& schema, DatasetOptions options) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(0, "empty file");
  const std::string header_line = line;
  const auto header = split_csv(header_line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) col.emplace(std::string(header[c]), c);

  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw DataError(0, fmt::format("missing required column '{}'", name));
    return it->second;
  };
  const std::size_t c_lon = require(schema.lon), c_lat = require(schema.lat);
  const std::size_t c_month = require(schema.month), c_year = require(schema.year);
  const std::size_t c_area = require(schema.area);
  const std::size_t c_cnt = require(schema.cnt), c_ba = require(schema.ba);
  std::array<std::size_t, kLandCoverCount> c_lc{};
  for (std::size_t k = 0; k < kLandCoverCount; ++k)
    c_lc[k] = require(fmt::format("{}{}", schema.land_cover_prefix, k + 1));
  std::optional<std::size_t> c_alt;
  if (auto it = col.find(schema.altitude); it != col.end()) c_alt = it->second;
  std::vector<bool> mapped(header.size(), false);
  for (std::size_t c : {c_lon, c_lat, c_month, c_year, c_area, c_cnt, c_ba}) mapped[c] = true;
  for (std::size_t c : c_lc) mapped[c] = true;
  if (c_alt) mapped[*c_alt] = true;
  std::vector<std::size_t> c_clim;
  std::vector<std::string> climate_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (mapped[c]) continue;
    c_clim.push_back(c);
    climate_names.emplace_back(header[c]);
  }

  std::vector<Observation> obs;
  std::vector<std::size_t> file_rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != header.size())
      throw DataError(row, fmt::format("expected {} fields, found {}", header.size(), f.size()));
    auto num = [&](std::size_t c, std::string_view name) {
      if (is_missing_token(f[c])) throw DataError(row, fmt::format("missing value in {}", name));
      return parse_double(f[c], row, name);
    };
    Observation o;
    o.lon = num(c_lon, schema.lon);
    o.lat = num(c_lat, schema.lat);
    if (is_missing_token(f[c_month]) || is_missing_token(f[c_year]))
      throw DataError(row, "missing month/year");
    o.month = static_cast<int>(parse_int(f[c_month], row, schema.month));
    o.year = static_cast<int>(parse_int(f[c_year], row, schema.year));
    o.area_fraction = num(c_area, schema.area);
    if (!is_missing_token(f[c_cnt])) o.cnt = parse_int(f[c_cnt], row, schema.cnt);
    if (!is_missing_token(f[c_ba])) o.ba = parse_double(f[c_ba], row, schema.ba);
    for (std::size_t k = 0; k < kLandCoverCount; ++k) o.land_cover[k] = num(c_lc[k], "land cover");
    for (std::size_t c : c_clim) o.climate.push_back(num(c, header[c]));
    if (c_alt) o.altitude = num(*c_alt, schema.altitude);
    obs.push_back(std::move(o));
    file_rows.push_back(row);
  }

  try {
    return Dataset(std::move(obs), std::move(climate_names), std::move(options));
  } catch (const DataError& e) {
    // Dataset reports 1-based positions; translate to file rows.
    std::size_t pos = e.row();
    if (pos == 0 || pos > file_rows.size()) throw;
    std::string msg = e.what();
    auto colon = msg.find(": ");
    throw DataError(file_rows[pos - 1], colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
}

void write_dataset_csv(const Dataset& data, std::ostream& out, const ColumnSchema& schema) {
  const bool has_altitude = !schema.altitude.empty();
  out << schema.lon << ',' << schema.lat << ',' << schema.month << ',' << schema.year << ','
      << schema.area << ',' << schema.cnt << ',' << schema.ba;
  for (std::size_t k = 0; k < kLandCoverCount; ++k) out << ',' << schema.land_cover_prefix << k + 1;
  for (const auto& name : data.climate_names()) out << ',' << name;
  if (has_altitude) out << ',' << schema.altitude;
  out << '\n';
  for (const auto& o : data.observations()) {
    out << fmt_double(o.lon) << ',' << fmt_double(o.lat) << ',' << o.month << ',' << o.year << ','
        << fmt_double(o.area_fraction) << ',';
    if (o.cnt) out << *o.cnt; else out << "NA";
    out << ',';
    if (o.ba) out << fmt_double(*o.ba); else out << "NA";
    for (double lc : o.land_cover) out << ',' << fmt_double(lc);
    for (double c : o.climate) out << ',' << fmt_double(c);
    if (has_altitude) out << ',' << fmt_double(o.altitude);
    out << '\n';
  }
}

void PredictionTable::validate() const {
  for (const auto& r : rows) {
    if (r.cdf.size() != thresholds.size())
      throw std::invalid_argument(fmt::format("prediction row {} has {} values for {} thresholds",
                                              r.index, r.cdf.size(), thresholds.size()));
    for (std::size_t k = 0; k < r.cdf.size(); ++k) {
      if (!(r.cdf[k] >= 0.0 && r.cdf[k] <= 1.0))
        throw std::invalid_argument(fmt::format("prediction row {} leaves [0,1]", r.index));
      if (k > 0 && r.cdf[k] < r.cdf[k - 1])
        throw std::invalid_argument(fmt::format("prediction row {} is not monotone", r.index));
    }
  }
}

void write_predictions_csv(const PredictionTable& table, std::ostream& out) {
  out << "index,threshold,probability\n";
  fmt::memory_buffer buf;
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < table.thresholds.size(); ++k) {
      buf.clear();
      fmt::format_to(std::back_inserter(buf), "{},{},{}\n", r.index, table.thresholds[k], r.cdf[k]);
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
  }
}

PredictionTable read_predictions_csv(std::istream& in, Variable variable) {
  PredictionTable t;
  t.variable = variable;
  std::string line;
  if (!std::getline(in, line)) throw DataError(0, "empty prediction file");
  std::vector<std::vector<double>> row_thresholds;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DataError(row, "expected index,threshold,probability");
    auto idx = static_cast<std::size_t>(parse_int(f[0], row, "index"));
    double u = parse_double(f[1], row, "threshold");
    double p = parse_double(f[2], row, "probability");
    // Rows are consecutive runs of one index with increasing thresholds;
    // repeated indices (duplicates) start a new run.
    if (t.rows.empty() || t.rows.back().index != idx || !(u > row_thresholds.back().back())) {
      t.rows.push_back({idx, {}});
      row_thresholds.emplace_back();
    }
    t.rows.back().cdf.push_back(p);
    row_thresholds.back().push_back(u);
  }
  if (!row_thresholds.empty()) t.thresholds = row_thresholds.front();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (row_thresholds[r] != t.thresholds)
      throw DataError(0, fmt::format("prediction row for index {} has a different threshold grid",
                                     t.rows[r].index));
  }
  return t;
}

}  // namespace firemarg
