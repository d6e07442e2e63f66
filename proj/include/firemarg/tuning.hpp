#pragma once

// Nearest-neighbour cross-validation over radius and tail-quantile grids.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "firemarg/ba_model.hpp"
#include "firemarg/count_model.hpp"
#include "firemarg/data.hpp"
#include "firemarg/geo.hpp"
#include "firemarg/neighborhoods.hpp"
#include "firemarg/scoring.hpp"

namespace firemarg {

struct TuningGrid {
  std::vector<double> radii;      // k1 candidates, strictly increasing, >= 0
  std::vector<double> quantiles;  // k2 candidates, strictly increasing, in (0,1)

  /// k1 in {50, 75, ..., 400}, k2 in {0.05, 0.10, ..., 0.95}.
  static TuningGrid defaults();
  void validate() const;
};

struct CvPair {
  std::size_t validation;
  std::size_t surrogate;
  double distance_km;
};

struct CvPlan {
  Variable variable = Variable::Count;
  std::vector<CvPair> pairs;         // in validation-index order; surrogates may repeat
  std::vector<std::size_t> skipped;  // no observed value in the slice
};

/// Surrogate = nearest same-month/year observation with the variable
/// observed; equal distances resolve to the smaller id.
CvPlan build_cv_plan(const Dataset& data, Variable v);

struct CvOptions {
  ZinbFitOptions zinb;
  MixtureOptions mixture;
  unsigned workers = 0;
};

/// Sum over pairs of the score of the surrogate's observed value under a
/// model fitted to the surrogate's neighbourhood without the surrogate.
/// `k2` is required for burnt area.
double cv_score(const Dataset& data, const BapView& bap, Variable v, const NeighborhoodSpec& spec,
                std::optional<double> k2, const CvPlan& plan, const ScoreConfig& config,
                const CvOptions& options = {});

struct CvTable {
  Variable variable = Variable::Count;
  NeighborhoodSpec base;          // variant, year half-width, covariate
  std::vector<double> radii;
  std::vector<double> quantiles;  // empty for counts
  std::vector<double> scores;     // radius-major
  std::size_t pairs = 0;

  std::size_t columns() const { return quantiles.empty() ? 1 : quantiles.size(); }
  double score(std::size_t r, std::size_t q = 0) const { return scores[r * columns() + q]; }

  struct Best {
    double radius;
    std::optional<double> k2;
    double score;
  };
  /// Argmin; ties go to the smaller radius, then the smaller k2.
  Best best() const;
};

/// Every grid point of `cv_score`, sharing neighbourhood queries across radii
/// and reusing scores when a larger radius adds no observed value. Results
/// equal point-by-point cv_score calls.
CvTable cv_grid(const Dataset& data, const BapView& bap, Variable v, const NeighborhoodSpec& base,
                const TuningGrid& grid, const CvPlan& plan, const ScoreConfig& config,
                const CvOptions& options = {});

struct SelectedParameters {
  double k1_cnt = 0.0;
  double k1_bap = 0.0;
  double k2_bap = 0.0;
  CvTable cnt;
  CvTable ba;
};

SelectedParameters select_parameters(const Dataset& data, const BapView& bap, const TuningGrid& grid,
                                     const ScoreWeights& weights, const CvOptions& options = {},
                                     const NeighborhoodSpec& base = {});

/// `variable,variant,ky,k1,k2,score`; k2 empty for counts.
void write_cv_table_csv(const CvTable& table, std::ostream& out, bool header = true);

}  // namespace firemarg
