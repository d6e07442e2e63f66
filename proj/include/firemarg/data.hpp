#pragma once

// Observation/dataset representation, threshold grids and CSV ingestion.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace firemarg {

enum class Variable { Count, BurntArea };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view s);

inline constexpr std::size_t kLandCoverCount = 18;
// lc(18), the water fraction, zero-based.
inline constexpr std::size_t kWaterLandCover = 17;
inline constexpr double kDefaultEarthRadiusKm = 6378.137;

struct Observation {
  std::size_t index = 0;
  double lon = 0.0;
  double lat = 0.0;
  int month = 0;
  int year = 0;
  double area_fraction = 1.0;
  std::optional<std::int64_t> cnt;
  std::optional<double> ba;
  std::array<double, kLandCoverCount> land_cover{};
  std::vector<double> climate;
  double altitude = 0.0;

  bool missing(Variable v) const {
    return v == Variable::Count ? !cnt.has_value() : !ba.has_value();
  }
  double water() const { return land_cover[kWaterLandCover]; }
};

struct SeasonRange {
  int first_month = 3;
  int last_month = 9;
  int first_year = 1993;
  int last_year = 2015;
};

struct ThresholdGrids {
  std::vector<double> cnt;
  std::vector<double> ba;

  const std::vector<double>& of(Variable v) const { return v == Variable::Count ? cnt : ba; }
};

/// The challenge threshold grids: 28 count levels {0..9,10,12..30,40..100}
/// and 28 burnt-area levels from 0 to 100000.
ThresholdGrids default_thresholds();

/// Error tied to an input row (1-based, header excluded) or observation.
class DataError : public std::runtime_error {
 public:
  DataError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

struct DatasetOptions {
  SeasonRange season;
  ThresholdGrids thresholds = default_thresholds();
  double earth_radius_km = kDefaultEarthRadiusKm;
};

class SpatialIndex;

/// Immutable, indexed collection of observations. Observation ids are
/// positions in ingestion order.
class Dataset {
 public:
  explicit Dataset(std::vector<Observation> observations, std::vector<std::string> climate_names = {},
                   DatasetOptions options = {});

  std::size_t size() const noexcept { return obs_.size(); }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  const std::vector<Observation>& observations() const noexcept { return obs_; }

  /// Sorted ids whose value for `v` is missing (CNT^val / BA^val).
  const std::vector<std::size_t>& missing(Variable v) const {
    return v == Variable::Count ? cnt_missing_ : ba_missing_;
  }
  const std::vector<double>& thresholds(Variable v) const { return options_.thresholds.of(v); }
  const ThresholdGrids& threshold_grids() const noexcept { return options_.thresholds; }
  const SeasonRange& season() const noexcept { return options_.season; }
  double earth_radius_km() const noexcept { return options_.earth_radius_km; }
  const DatasetOptions& options() const noexcept { return options_; }

  const std::vector<std::string>& climate_names() const noexcept { return climate_names_; }
  std::optional<std::size_t> climate_column(std::string_view name) const;

  /// Years actually present in the data.
  int min_year() const noexcept { return min_year_; }
  int max_year() const noexcept { return max_year_; }

  const SpatialIndex& spatial_index() const noexcept { return *index_; }

 private:
  std::vector<Observation> obs_;
  std::vector<std::string> climate_names_;
  DatasetOptions options_;
  std::vector<std::size_t> cnt_missing_;
  std::vector<std::size_t> ba_missing_;
  int min_year_ = 0;
  int max_year_ = 0;
  std::shared_ptr<const SpatialIndex> index_;
};

/// Maps logical fields onto CSV header names. Every other column is a
/// climate covariate, kept in header order.
struct ColumnSchema {
  std::string lon = "lon";
  std::string lat = "lat";
  std::string month = "month";
  std::string year = "year";
  std::string area = "area";
  std::string cnt = "cnt";
  std::string ba = "ba";
  std::string land_cover_prefix = "lc";  // lc1..lc18
  std::string altitude = "altitude";     // optional
};

Dataset ingest_csv(const std::filesystem::path& path, const ColumnSchema& schema = {},
                   DatasetOptions options = {});
Dataset ingest_csv(std::istream& in, const ColumnSchema& schema = {}, DatasetOptions options = {});

/// Writes the dataset in the layout `ingest_csv` reads; missing values as NA.
void write_dataset_csv(const Dataset& data, std::ostream& out, const ColumnSchema& schema = {});

bool is_missing_token(std::string_view field);

/// Per missing index, predicted CDF values at each threshold.
struct PredictionRow {
  std::size_t index = 0;
  std::vector<double> cdf;
};

struct PredictionTable {
  Variable variable = Variable::Count;
  std::vector<double> thresholds;
  std::vector<PredictionRow> rows;

  /// Throws if a row has the wrong length, leaves [0,1] or decreases.
  void validate() const;
};

/// CSV with header `index,threshold,probability`, one line per (index, threshold).
void write_predictions_csv(const PredictionTable& table, std::ostream& out);
PredictionTable read_predictions_csv(std::istream& in, Variable variable);

}  // namespace firemarg
