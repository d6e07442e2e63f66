#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "firemarg/neighborhoods.hpp"
#include "firemarg/spatial_index.hpp"
#include "support.hpp"

using namespace firemarg;

namespace {

// 7x7 grid around the equator with 55 km spacing, one slice per year.
Dataset km_grid(const std::vector<int>& years) {
  const double deg = 55.0 / (kDefaultEarthRadiusKm * std::numbers::pi / 180.0);
  std::vector<Observation> rows;
  for (int y : years)
    for (int a = -3; a <= 3; ++a)
      for (int b = -3; b <= 3; ++b) rows.push_back(testing::obs(a * deg, b * deg, 7, y));
  return testing::dataset(rows);
}

std::size_t id_at(const Dataset& d, int a, int b, int year) {
  const double deg = 55.0 / (kDefaultEarthRadiusKm * std::numbers::pi / 180.0);
  for (const auto& o : d.observations())
    if (o.year == year && std::abs(o.lon - a * deg) < 1e-12 && std::abs(o.lat - b * deg) < 1e-12)
      return o.index;
  throw std::logic_error("no such cell");
}

double sse(const std::vector<double>& v, const std::vector<int>& labels) {
  double total = 0.0;
  for (int g : {0, 1}) {
    double s = 0.0, n = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (labels[k] == g) s += v[k], n += 1;
    const double mean = s / n;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (labels[k] == g) total += (v[k] - mean) * (v[k] - mean);
  }
  return total;
}

}  // namespace

TEST_SUITE("neighborhoods") {
  TEST_CASE("radius zero keeps only the co-located centre") {
    const auto d = km_grid({2000});
    const auto c = id_at(d, 0, 0, 2000);
    CHECK(spatial_neighborhood(d, c, 0.0).members == std::vector<std::size_t>{c});
  }

  TEST_CASE("55 km grid with radius 60 keeps the four axial neighbours") {
    const auto d = km_grid({2000});
    const auto c = id_at(d, 0, 0, 2000);
    std::vector<std::size_t> expect{c, id_at(d, 1, 0, 2000), id_at(d, -1, 0, 2000),
                                    id_at(d, 0, 1, 2000), id_at(d, 0, -1, 2000)};
    std::sort(expect.begin(), expect.end());
    CHECK(spatial_neighborhood(d, c, 60.0).members == expect);
    CHECK(haversine_km({d[c].lon, d[c].lat}, {d[id_at(d, 1, 1, 2000)].lon, d[id_at(d, 1, 1, 2000)].lat}) ==
          doctest::Approx(77.78).epsilon(1e-3));
  }

  TEST_CASE("half circumference covers the slice") {
    const auto d = km_grid({2000, 2001});
    const auto n = spatial_neighborhood(d, 3, 20015.0);
    CHECK(n.members.size() == 49);
    for (auto j : n.members) CHECK(d[j].year == d[3].year);
  }

  TEST_CASE("temporal neighbourhoods") {
    const std::vector<int> years{1993, 1994, 1995, 1996, 1997, 1998, 1999, 2000, 2001};
    const auto d = km_grid(years);
    const auto c = id_at(d, 0, 0, 1996);
    CHECK(temporal_neighborhood(d, c, 60.0, 0).members == spatial_neighborhood(d, c, 60.0).members);

    std::vector<std::size_t> brute;
    for (const auto& o : d.observations())
      if (std::abs(o.year - 1996) <= 1 && haversine_km({o.lon, o.lat}, {d[c].lon, d[c].lat}) <= 60.0)
        brute.push_back(o.index);
    CHECK(temporal_neighborhood(d, c, 60.0, 1).members == brute);
    CHECK(brute.size() == 15);

    const auto first = id_at(d, 0, 0, 1993);
    std::set<int> seen;
    for (auto j : temporal_neighborhood(d, first, 0.0, 6).members) seen.insert(d[j].year);
    CHECK(seen == std::set<int>{1993, 1994, 1995, 1996, 1997, 1998, 1999});
  }

  TEST_CASE("spec validation and dispatch") {
    CHECK_THROWS(NeighborhoodSpec{NeighborhoodVariant::Spatial, -1.0, 0, {}}.validate());
    CHECK_THROWS(NeighborhoodSpec{NeighborhoodVariant::Temporal, 10.0, 0, {}}.validate());
    CHECK_THROWS(NeighborhoodSpec{NeighborhoodVariant::Cluster, 10.0, 0, {}}.validate());
    CHECK(parse_variant("temporal") == NeighborhoodVariant::Temporal);
    CHECK_THROWS(parse_variant("radial"));
    const auto d = km_grid({2000, 2001});
    const auto c = id_at(d, 0, 0, 2001);
    CHECK(build_neighborhood(d, c, {NeighborhoodVariant::Temporal, 60.0, 1, {}}, Variable::Count).members ==
          temporal_neighborhood(d, c, 60.0, 1).members);
  }

  TEST_CASE("cluster split on a two-level covariate") {
    std::vector<Observation> rows;
    const double vals[] = {0, 0, 0, 10, 10, 10};
    for (int k = 0; k < 6; ++k) {
      auto o = testing::obs(0.1 * k, 0.0, 6, 2000);
      o.altitude = vals[k];
      rows.push_back(o);
    }
    const auto d = testing::dataset(rows);
    const Covariate alt{Covariate::Kind::Altitude, 0};
    CHECK(cluster_neighborhood(d, 1, 500.0, alt).members == std::vector<std::size_t>{0, 1, 2});
    CHECK(cluster_neighborhood(d, 4, 500.0, alt).members == std::vector<std::size_t>{3, 4, 5});

    auto flat = rows;
    for (auto& o : flat) o.altitude = 5;
    const auto f = testing::dataset(flat);
    const auto n = cluster_neighborhood(f, 2, 500.0, alt);
    CHECK(n.degenerate_split);
    CHECK(n.members.size() == 6);

    const std::vector<Observation> pair{rows[0], rows[3]};
    const auto p = testing::dataset(pair);
    const auto s = cluster_neighborhood(p, 0, 500.0, alt);
    CHECK(s.members == std::vector<std::size_t>{0});
    CHECK_FALSE(s.degenerate_split);
  }

  TEST_CASE("covariate resolution") {
    const auto d = testing::dataset({testing::obs(0, 0, 6, 2000)}, {});
    CHECK(resolve_covariate(d, "lc18").column == 17);
    CHECK(resolve_covariate(d, "altitude").kind == Covariate::Kind::Altitude);
    CHECK_THROWS(resolve_covariate(d, "lc19"));
    CHECK_THROWS(resolve_covariate(d, "temperature"));
  }

  TEST_CASE("bisect_1d matches brute force over all two-group partitions") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 9);
      std::vector<double> v(static_cast<std::size_t>(n));
      for (auto& x : v) x = static_cast<double>(rng() % 6);
      const auto labels = bisect_1d(v);
      if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) {
        CHECK_FALSE(labels);
        continue;
      }
      REQUIRE(labels);
      double best = std::numeric_limits<double>::infinity();
      for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<int> l(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) l[k] = (mask >> k) & 1u;
        best = std::min(best, sse(v, l));
      }
      CHECK(sse(v, *labels) == doctest::Approx(best).epsilon(1e-12));
      double max_low = -1e300, min_high = 1e300;
      for (int k = 0; k < n; ++k)
        (*labels)[k] == 0 ? max_low = std::max(max_low, v[k]) : min_high = std::min(min_high, v[k]);
      CHECK(max_low < min_high);
    }
  }

  TEST_CASE("ranked members give nested discs") {
    const auto d = km_grid({2000, 2001, 2002});
    const auto c = id_at(d, 1, -1, 2001);
    const auto ranked = ranked_members(d, c, 200.0, 2000, 2002);
    CHECK(std::is_sorted(ranked.begin(), ranked.end()));
    for (double r : {0.0, 55.0, 60.0, 100.0, 150.0, 200.0}) {
      std::vector<std::size_t> prefix;
      for (const auto& [dist, id] : ranked)
        if (dist <= r) prefix.push_back(id);
      std::sort(prefix.begin(), prefix.end());
      CHECK(prefix == temporal_neighborhood(d, c, r, 1).members);
    }
  }

  TEST_CASE("samples skip missing values and the excluded id") {
    std::vector<Observation> rows{testing::obs(0, 0, 6, 2000, 3, 1.0),
                                  testing::obs(0.1, 0, 6, 2000, std::nullopt, 2.0),
                                  testing::obs(0.2, 0, 6, 2000, 5, std::nullopt)};
    const auto d = testing::dataset(rows);
    const std::vector<std::size_t> all{0, 1, 2};
    CHECK(count_sample(d, all) == std::vector<std::int64_t>{3, 5});
    CHECK(count_sample(d, all, 0) == std::vector<std::int64_t>{5});
    const std::vector<std::optional<double>> bap{0.1, 0.2, std::nullopt};
    CHECK(bap_sample(bap, all, 1) == std::vector<double>{0.1});
  }
}
