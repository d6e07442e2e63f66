#include "firemarg/tuning.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "firemarg/marginal.hpp"
#include "firemarg/parallel.hpp"
#include "firemarg/spatial_index.hpp"

namespace firemarg {

TuningGrid TuningGrid::defaults() {
  TuningGrid g;
  for (int r = 50; r <= 400; r += 25) g.radii.push_back(r);
  for (int q = 1; q <= 19; ++q) g.quantiles.push_back(q / 20.0);
  return g;
}

void TuningGrid::validate() const {
  if (radii.empty()) throw std::invalid_argument("tuning grid: no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= 0.0) || !std::isfinite(radii[k]))
      throw std::invalid_argument("tuning grid: radii must be finite and >= 0");
    if (k > 0 && !(radii[k] > radii[k - 1]))
      throw std::invalid_argument("tuning grid: radii must increase");
  }
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    if (!(quantiles[k] > 0.0 && quantiles[k] < 1.0))
      throw std::invalid_argument("tuning grid: quantiles must lie in (0,1)");
    if (k > 0 && !(quantiles[k] > quantiles[k - 1]))
      throw std::invalid_argument("tuning grid: quantiles must increase");
  }
}

CvPlan build_cv_plan(const Dataset& data, Variable v) {
  CvPlan plan;
  plan.variable = v;
  const auto accept = [&](std::size_t j) { return !data[j].missing(v); };
  for (std::size_t i : data.missing(v)) {
    const auto& o = data[i];
    const auto nn = data.spatial_index().nearest({o.lon, o.lat}, o.month, o.year, accept);
    if (!nn) {
      spdlog::warn("cv plan ({}): index {} has no observed value in month {} of {}", to_string(v),
                   i, o.month, o.year);
      plan.skipped.push_back(i);
      continue;
    }
    plan.pairs.push_back({i, nn->id, nn->distance_km});
  }
  return plan;
}

namespace {

struct PairContext {
  const Dataset& data;
  const BapView& bap;
  Variable v;
  const ScoreConfig& config;
  const CvOptions& options;
  const PooledBenchmark& pooled;
  const std::vector<std::optional<double>>& truth;
};

double observed(const PairContext& c, std::size_t j) { return *c.truth[j]; }

double score_count_sample(const PairContext& c, std::size_t j, std::span<const std::int64_t> sample) {
  const auto& grid = c.data.thresholds(Variable::Count);
  std::vector<double> row = sample.empty()
                                ? c.pooled.row(c.data[j].month, observed(c, j))
                                : count_cdf_row(fit_zinb(sample, c.options.zinb), grid);
  return score_one(row, observed(c, j), grid, c.config);
}

/// One score per quantile. `sorted` ascending.
void score_bap_sample(const PairContext& c, std::size_t j, std::span<const double> sorted,
                      std::span<const double> quantiles, std::span<double> out) {
  const auto& grid = c.data.thresholds(Variable::BurntArea);
  if (sorted.empty()) {
    const auto row = c.pooled.row(c.data[j].month, observed(c, j));
    const double s = score_one(row, observed(c, j), grid, c.config);
    std::fill(out.begin(), out.end(), s);
    return;
  }
  const auto thresholds = c.bap.thresholds(j, grid);
  for (std::size_t q = 0; q < quantiles.size(); ++q) {
    const auto model = fit_mixture_sorted(sorted, quantiles[q], c.options.mixture);
    out[q] = score_one(bap_cdf_row(model, thresholds), observed(c, j), grid, c.config);
  }
}

const ScoreConfig& checked(const ScoreConfig& config, const Dataset& data, Variable v) {
  config.validate(data.thresholds(v).size());
  return config;
}

}  // namespace

double cv_score(const Dataset& data, const BapView& bap, Variable v, const NeighborhoodSpec& spec,
                std::optional<double> k2, const CvPlan& plan, const ScoreConfig& config,
                const CvOptions& options) {
  spec.validate();
  if (v == Variable::BurntArea && !k2) throw std::invalid_argument("cv_score: k2 required for BA");
  if (plan.variable != v) throw std::invalid_argument("cv_score: plan is for the other variable");
  const PooledBenchmark pooled(data, v);
  const auto truth = observed_values(data, v);
  const PairContext ctx{data, bap, v, checked(config, data, v), options, pooled, truth};

  std::vector<double> parts(plan.pairs.size());
  parallel_indices(plan.pairs.size(), options.workers, [&](std::size_t p) {
    const std::size_t j = plan.pairs[p].surrogate;
    const auto nb = build_neighborhood(data, j, spec, v);
    if (v == Variable::Count) {
      parts[p] = score_count_sample(ctx, j, count_sample(data, nb.members, j));
    } else {
      auto sample = bap_sample(bap.bap, nb.members, j);
      std::sort(sample.begin(), sample.end());
      const double q = *k2;
      score_bap_sample(ctx, j, sample, std::span<const double>(&q, 1), std::span<double>(&parts[p], 1));
    }
  });
  return pairwise_sum(parts);
}

CvTable::Best CvTable::best() const {
  Best b{radii.front(), quantiles.empty() ? std::nullopt : std::optional<double>(quantiles.front()),
         score(0, 0)};
  for (std::size_t r = 0; r < radii.size(); ++r)
    for (std::size_t q = 0; q < columns(); ++q)
      if (score(r, q) < b.score)
        b = {radii[r], quantiles.empty() ? std::nullopt : std::optional<double>(quantiles[q]),
             score(r, q)};
  return b;
}

CvTable cv_grid(const Dataset& data, const BapView& bap, Variable v, const NeighborhoodSpec& base,
                const TuningGrid& grid, const CvPlan& plan, const ScoreConfig& config,
                const CvOptions& options) {
  grid.validate();
  if (v == Variable::BurntArea && grid.quantiles.empty())
    throw std::invalid_argument("cv_grid: BA needs k2 candidates");
  if (plan.variable != v) throw std::invalid_argument("cv_grid: plan is for the other variable");
  NeighborhoodSpec probe = base;
  probe.radius_km = grid.radii.back();
  probe.validate();

  CvTable table;
  table.variable = v;
  table.base = base;
  table.radii = grid.radii;
  if (v == Variable::BurntArea) table.quantiles = grid.quantiles;
  table.pairs = plan.pairs.size();
  const std::size_t nr = table.radii.size(), nq = table.columns();

  const PooledBenchmark pooled(data, v);
  const auto truth = observed_values(data, v);
  const PairContext ctx{data, bap, v, checked(config, data, v), options, pooled, truth};
  const bool nested = base.variant != NeighborhoodVariant::Cluster;

  // slots[p][r * nq + q]
  std::vector<std::vector<double>> slots(plan.pairs.size());
  parallel_indices(plan.pairs.size(), options.workers, [&](std::size_t p) {
    const std::size_t j = plan.pairs[p].surrogate;
    auto& out = slots[p];
    out.assign(nr * nq, 0.0);

    std::vector<std::int64_t> counts;
    std::vector<double> baps;
    auto add = [&](std::size_t m) {
      if (m == j) return;
      if (v == Variable::Count) {
        if (const auto& c = data[m].cnt) counts.push_back(*c);
      } else if (const auto& b = bap.bap[m]) {
        baps.push_back(*b);
      }
    };
    auto size = [&] { return v == Variable::Count ? counts.size() : baps.size(); };
    auto evaluate = [&](std::size_t r) {
      if (v == Variable::Count) {
        out[r] = score_count_sample(ctx, j, counts);
      } else {
        std::vector<double> sorted = baps;
        std::sort(sorted.begin(), sorted.end());
        score_bap_sample(ctx, j, sorted, table.quantiles, std::span<double>(out).subspan(r * nq, nq));
      }
    };

    if (nested) {
      const int ky = base.variant == NeighborhoodVariant::Temporal ? base.year_half_width : 0;
      const int y = data[j].year;
      const auto ranked = ranked_members(data, j, grid.radii.back(), y - ky, y + ky);
      std::size_t pos = 0, last_size = 0;
      for (std::size_t r = 0; r < nr; ++r) {
        while (pos < ranked.size() && ranked[pos].first <= grid.radii[r]) add(ranked[pos++].second);
        if (r > 0 && size() == last_size) {
          std::copy_n(out.begin() + (r - 1) * nq, nq, out.begin() + r * nq);
          continue;
        }
        evaluate(r);
        last_size = size();
      }
    } else {
      for (std::size_t r = 0; r < nr; ++r) {
        NeighborhoodSpec spec = base;
        spec.radius_km = grid.radii[r];
        counts.clear();
        baps.clear();
        for (std::size_t m : build_neighborhood(data, j, spec, v).members) add(m);
        evaluate(r);
      }
    }
  });

  table.scores.assign(nr * nq, 0.0);
  std::vector<double> column(plan.pairs.size());
  for (std::size_t c = 0; c < nr * nq; ++c) {
    for (std::size_t p = 0; p < plan.pairs.size(); ++p) column[p] = slots[p][c];
    table.scores[c] = pairwise_sum(column);
  }
  return table;
}

SelectedParameters select_parameters(const Dataset& data, const BapView& bap, const TuningGrid& grid,
                                     const ScoreWeights& weights, const CvOptions& options,
                                     const NeighborhoodSpec& base) {
  SelectedParameters s;
  const auto cnt_plan = build_cv_plan(data, Variable::Count);
  const auto ba_plan = build_cv_plan(data, Variable::BurntArea);
  s.cnt = cv_grid(data, bap, Variable::Count, base, grid, cnt_plan, weights.cnt, options);
  s.ba = cv_grid(data, bap, Variable::BurntArea, base, grid, ba_plan, weights.ba, options);
  s.k1_cnt = s.cnt.best().radius;
  const auto b = s.ba.best();
  s.k1_bap = b.radius;
  s.k2_bap = *b.k2;
  return s;
}

void write_cv_table_csv(const CvTable& table, std::ostream& out, bool header) {
  if (header) out << "variable,variant,ky,k1,k2,score\n";
  for (std::size_t r = 0; r < table.radii.size(); ++r)
    for (std::size_t q = 0; q < table.columns(); ++q) {
      fmt::print(out, "{},{},{},{},", to_string(table.variable), to_string(table.base.variant),
                 table.base.year_half_width, table.radii[r]);
      if (!table.quantiles.empty()) fmt::print(out, "{}", table.quantiles[q]);
      fmt::print(out, ",{}\n", table.score(r, q));
    }
}

}  // namespace firemarg
