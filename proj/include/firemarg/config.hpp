#pragma once

// Run configuration: INI file with sections, every key optional.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "firemarg/data.hpp"
#include "firemarg/dependence.hpp"
#include "firemarg/geo.hpp"
#include "firemarg/neighborhoods.hpp"
#include "firemarg/rules.hpp"
#include "firemarg/scoring.hpp"
#include "firemarg/synth.hpp"
#include "firemarg/tuning.hpp"

namespace firemarg {

struct RunConfig {
  // [paths]
  std::string input;   // dataset CSV; empty: generate from [synth]
  std::string truth;   // optional `index,cnt,ba` file for scoring real data
  std::string output_dir = "firemarg_out";
  std::string weights; // optional `variable,threshold,weight` file

  // [data]
  SeasonRange season;
  ThresholdGrids thresholds = default_thresholds();

  // [geo]
  GeoConfig geo;

  // [model]
  NeighborhoodVariant variant = NeighborhoodVariant::Spatial;
  double k1_cnt = 125.0;
  double k1_ba = 175.0;
  double k2 = 0.5;
  int ky = 1;
  std::string covariate = "temperature";

  // [tuning]
  bool tune = true;
  TuningGrid grid = TuningGrid::defaults();

  // [rules]
  RuleToggles rules;
  double water_cut = kDefaultWaterCut;
  bool calibrate_water = false;
  double water_target = 0.999;

  // [explore]
  ExploreOptions explore;

  // [run]
  std::uint64_t seed = 1;
  unsigned workers = 0;  // never affects output

  // [synth]
  SyntheticSpec synth;

  NeighborhoodSpec spec(Variable v) const;
  DatasetOptions dataset_options() const;
  void validate() const;
};

/// Unknown sections or keys are errors.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// INI text that parse_config reads back to the same values. Without
/// `include_runtime` (workers, output_dir) the text covers exactly the
/// settings that affect output content.
std::string dump_config(const RunConfig& config, bool include_runtime = true);

/// Hex SHA-256 of dump_config(config, false).
std::string config_hash(const RunConfig& config);
std::string sha256_hex(const std::string& bytes);

/// `variable,threshold,weight` rows; each grid threshold needs exactly one.
ScoreWeights load_weights(const std::filesystem::path& path, const ThresholdGrids& grids);
ScoreWeights parse_weights(std::istream& in, const ThresholdGrids& grids);

/// "a,b,c" or "lo:hi:step" (inclusive).
std::vector<double> parse_list(const std::string& text);

}  // namespace firemarg
