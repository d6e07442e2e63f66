#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "firemarg/scoring.hpp"
#include "support.hpp"

using namespace firemarg;

TEST_SUITE("scoring") {
  TEST_CASE("score_one arithmetic") {
    const std::vector<double> u{0, 1, 2};
    const auto w = ScoreConfig{{1, 1, 1}};
    CHECK(score_one(std::vector<double>{0, 1, 1}, 1.0, u, w) == 0.0);
    CHECK(score_one(std::vector<double>{0.5}, 3.0, std::vector<double>{1.0}, ScoreConfig{{1.0}}) == 0.25);
    CHECK(score_one(std::vector<double>{0.2, 0.5, 0.9}, 1.0, u, ScoreConfig{{2, 1, 3}}) ==
          doctest::Approx(2 * 0.04 + 0.25 + 3 * 0.01));
  }

  TEST_CASE("linear tail weights") {
    const auto c = ScoreConfig::linear_tail(4);
    CHECK(c.weights == std::vector<double>{1, 2, 3, 4});
    CHECK(ScoreConfig::linear_tail(1).weights == std::vector<double>{1});
    CHECK_THROWS(ScoreConfig{{1, -1}}.validate(2));
    CHECK_THROWS(ScoreConfig{{0, 0}}.validate(2));
    CHECK_THROWS(ScoreConfig{{1}}.validate(2));
  }

  TEST_CASE("row checks") {
    CHECK_NOTHROW(check_cdf_row(std::vector<double>{0, 0.5, 1}, 3));
    CHECK_THROWS(check_cdf_row(std::vector<double>{0, 0.5}, 3));
    CHECK_THROWS(check_cdf_row(std::vector<double>{0.6, 0.5, 1}, 3));
    CHECK_THROWS(check_cdf_row(std::vector<double>{0, 0.5, 1.5}, 3));
  }

  TEST_CASE("propriety on enumerated three-point truths") {
    const std::vector<double> u{0, 1, 2};
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> wd(0.0, 5.0);
    for (int trial = 0; trial < 5; ++trial) {
      const ScoreConfig w{{wd(rng), wd(rng), wd(rng)}};
      for (int a = 0; a <= 20; ++a)
        for (int b = 0; a + b <= 20; b += 4) {
          const double p[3] = {a / 20.0, b / 20.0, (20 - a - b) / 20.0};
          const std::vector<double> truth{p[0], p[0] + p[1], 1.0};
          auto expected = [&](const std::vector<double>& f) {
            double s = 0.0;
            for (int x = 0; x < 3; ++x) s += p[x] * score_one(f, x, u, w);
            return s;
          };
          const double at_truth = expected(truth);
          for (int i = 0; i <= 20; ++i)
            for (int j = i; j <= 20; ++j)
              CHECK(at_truth <= expected({i / 20.0, j / 20.0, 1.0}) + 1e-12);
        }
    }
  }

  TEST_CASE("score sets") {
    const std::vector<std::optional<double>> truth{std::nullopt, 0.0, 3.0};
    const auto w = ScoreConfig{{1, 1}};
    PredictionTable t{Variable::Count, {0, 2}, {}};
    CHECK(score_set(t, truth, w).total == 0.0);
    CHECK(score_set(t, truth, w).n == 0);

    t.rows = {{1, {0.5, 1.0}}, {2, {0.5, 1.0}}};
    const double a = score_one(t.rows[0].cdf, 0.0, t.thresholds, w);
    const double b = score_one(t.rows[1].cdf, 3.0, t.thresholds, w);
    const auto s = score_set(t, truth, w);
    CHECK(s.total == doctest::Approx(a + b));

    t.rows.push_back({2, {0.5, 1.0}});
    const auto dup = score_set(t, truth, w);
    CHECK(dup.n == 3);
    CHECK(dup.total == doctest::Approx(a + 2 * b));

    PredictionTable one{Variable::Count, {0, 2}, {{1, {0.5, 1.0}}}};
    PredictionTable two{Variable::Count, {0, 2}, {{2, {0.5, 1.0}}}};
    const ScoreSummary parts[] = {score_set(one, truth, w), score_set(two, truth, w)};
    CHECK(combine(parts).total == doctest::Approx(s.total));
    CHECK(combine(parts).n == 2);

    PredictionTable bad{Variable::Count, {0, 2}, {{0, {0.5, 1.0}}}};
    CHECK_THROWS_AS(score_set(bad, truth, w), std::out_of_range);
  }

  TEST_CASE("pairwise sum") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum({}) == 0.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto& x : v) x = d(rng);
    long double ref = 0;
    for (double x : v) ref += x;
    CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }

  TEST_CASE("pooled benchmark is the same-month ECDF") {
    using testing::obs;
    const auto d = testing::dataset({obs(0, 0, 6, 2000, 0, 0.0), obs(1, 0, 6, 2001, 3, 0.0),
                                     obs(2, 0, 6, 2002, 12, 0.0), obs(3, 0, 7, 2000, 100, 0.0),
                                     obs(4, 0, 6, 2003, std::nullopt, 0.0)});
    const auto t = benchmark_predictions(d, Variable::Count);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].index == 4);
    const auto& g = d.thresholds(Variable::Count);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double expect = ((g[k] >= 0) + (g[k] >= 3) + (g[k] >= 12)) / 3.0;
      CHECK(t.rows[0].cdf[k] == doctest::Approx(expect));
    }
  }

  TEST_CASE("score csv") {
    const std::vector<ScoreSummary> s{{"cnt", 2, 3.0}};
    std::ostringstream out;
    write_score_csv(s, out);
    CHECK(out.str() == "variable,n,total,mean\ncnt,2,3,1.5\n");
  }
}
