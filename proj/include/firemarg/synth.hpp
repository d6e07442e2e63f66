#pragma once

// Seeded synthetic datasets with known marginals.
//
// Layout: a regular lon/lat grid. "Hotspots" are discs of radius R around
// lattice centres; every cell in a disc shares one ZINB/BAP marginal per
// (month, year). Cells outside every disc draw their own low-activity
// marginal, so pooling past R mixes in a different distribution. The cell
// east of each centre is the planted validation site; its nearest observed
// cell is the centre (ties with the cell further east resolve to the centre's
// smaller id), so cross-validation at the centre sees exactly R.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "firemarg/count_model.hpp"
#include "firemarg/data.hpp"
#include "firemarg/geo.hpp"

namespace firemarg {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct MarginalRanges {
  Range pi;
  Range mu;         // log-uniform
  Range r;
  Range bap_scale;  // log-uniform; BAP = min(1, scale * GPD(1, xi)) when CNT > 0
  Range xi;
};

struct SyntheticSpec {
  double lon_min = -110.0;
  double lon_max = -90.0;  // exclusive upper edge of cell centres
  double lat_min = 35.0;
  double lat_max = 45.0;
  double spacing = 0.5;
  std::vector<int> months{3, 4, 5, 6, 7, 8, 9};
  std::vector<int> years{2001, 2002, 2003, 2004, 2005};

  double shared_radius_km = 150.0;
  double hotspot_gap_km = 250.0;  // background ring between neighbouring discs
  bool year_varying = true;       // false: hotspot marginals depend on month only
  /// Log-uniform multiplier of mu and BAP scale shared by every cell of a
  /// (month, year) slice; applied only when year_varying.
  Range year_effect{0.25, 4.0};

  /// Target fraction of observations with at least one missing value. Any
  /// positive rate masks every validation site first, then adds background
  /// clusters (outside discs) until the target is reached. 0 masks nothing.
  double missing_rate = 0.02;
  double cluster_radius_km = 80.0;
  /// Share of masked sites missing both variables; the rest split evenly
  /// between CNT-only and BA-only.
  double overlap = 1.0;

  double water_fraction = 0.02;     // background cells with lc18 in (0.95, 1]
  double partial_fraction = 0.1;    // cells with area fraction in [0.3, 1)

  MarginalRanges hotspot{{0.05, 0.3}, {5.0, 30.0}, {1.0, 4.0}, {1e-3, 1e-2}, {0.1, 0.4}};
  MarginalRanges background{{0.5, 0.9}, {0.3, 2.0}, {0.5, 2.0}, {1e-5, 1e-4}, {0.1, 0.4}};

  GeoConfig geo;

  /// Throws std::invalid_argument when no disc fits the domain or a
  /// parameter range is invalid.
  void validate() const;
};

struct TruthRecord {
  ZinbParams cnt_params;
  double bap_scale = 0.0;
  double bap_xi = 0.0;
  std::int64_t cnt = 0;
  double ba = 0.0;
  double bap = 0.0;
  int hotspot = -1;  // -1: background
  bool water = false;
};

struct Hotspot {
  double lon;
  double lat;
};

struct SyntheticData {
  Dataset data;
  std::vector<TruthRecord> truth;  // by observation id, including masked values
  std::vector<Hotspot> hotspots;
};

SyntheticData synth(const SyntheticSpec& spec, std::uint64_t seed);

/// Ground-truth value per id for one variable (all ids).
std::vector<std::optional<double>> truth_values(const SyntheticData& s, Variable v);

std::int64_t sample_zinb(const ZinbParams& p, std::mt19937_64& rng);
/// min(1, scale * Y) with Y ~ GPD(sigma = 1, xi).
double sample_bap(double scale, double xi, std::mt19937_64& rng);

/// `index,cnt,ba` for every masked value (the other field NA).
void write_truth_csv(const SyntheticData& s, std::ostream& out);
/// Reads `index,cnt,ba` into per-variable value vectors of length n.
struct TruthTable {
  std::vector<std::optional<double>> cnt;
  std::vector<std::optional<double>> ba;
};
TruthTable read_truth_csv(std::istream& in, std::size_t n);

}  // namespace firemarg
