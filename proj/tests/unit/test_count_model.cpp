#include <cmath>
#include <random>

#include "doctest.h"
#include "firemarg/count_model.hpp"
#include "firemarg/synth.hpp"

using namespace firemarg;

namespace {

// NB(mu, r) pmf by the ratio recursion g(j+1) = g(j) (j + r) / (j + 1) * mu / (mu + r).
std::vector<double> nb_recursion(double mu, double r, int jmax) {
  std::vector<double> g(static_cast<std::size_t>(jmax) + 1);
  g[0] = std::pow(r / (r + mu), r);
  for (int j = 0; j < jmax; ++j) g[j + 1] = g[j] * (j + r) / (j + 1) * mu / (mu + r);
  return g;
}

std::vector<std::int64_t> draw(const ZinbParams& p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = sample_zinb(p, rng);
  return out;
}

}  // namespace

TEST_SUITE("count_model") {
  TEST_CASE("pmf special cases") {
    CHECK(zinb_pmf({1.0, 3.0, 2.0}, 0) == 1.0);
    CHECK(zinb_pmf({1.0, 3.0, 2.0}, 4) == 0.0);
    CHECK(zinb_pmf({0.5, 1.5, 1.0}, 0) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(zinb_pmf({0.5, 1.5, 1.0}, -1) == 0.0);
  }

  TEST_CASE("pmf matches the NB recursion and sums to one") {
    for (const ZinbParams p : {ZinbParams{0.0, 4.0, 2.0}, ZinbParams{0.3, 0.7, 0.4},
                               ZinbParams{0.1, 25.0, 3.5}, ZinbParams{0.0, 2.0, 150.0}}) {
      const auto g = nb_recursion(p.mu, p.r, 3000);
      double sum = 0.0;
      for (int j = 0; j <= 3000; ++j) {
        const double expect = (j == 0 ? p.pi : 0.0) + (1 - p.pi) * g[j];
        CHECK(zinb_pmf(p, j) == doctest::Approx(expect).epsilon(1e-10));
        sum += zinb_pmf(p, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  }

  TEST_CASE("cdf") {
    const ZinbParams p{0.2, 3.0, 1.5};
    CHECK(zinb_cdf(p, -1.0) == 0.0);
    CHECK(zinb_cdf(p, 0.0) == doctest::Approx(p.pi + (1 - p.pi) * std::pow(1.5 / 4.5, 1.5)));
    CHECK(zinb_cdf(p, 2.7) == zinb_cdf(p, 2.0));
    CHECK(std::abs(zinb_cdf(p, 1e6) - 1.0) < 1e-9);
    CHECK(std::abs(zinb_cdf({0.0, 90.0, 0.2}, 1e6) - 1.0) < 1e-9);
    double acc = 0.0;
    for (int j = 0; j <= 40; ++j) {
      acc += zinb_pmf(p, j);
      CHECK(zinb_cdf(p, j) == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS(ZinbParams{-0.1, 1, 1}.validate());
    CHECK_THROWS(ZinbParams{0.1, 0, 1}.validate());
    CHECK_THROWS(ZinbParams{0.1, 1, 0}.validate());
  }

  TEST_CASE("fallbacks") {
    const auto empty = fit_zinb({});
    CHECK(empty.kind == CountModelKind::Empirical);
    CHECK(empty.fallback == CountFallback::Empty);
    CHECK_THROWS(empty.cdf(1.0));

    const std::vector<std::int64_t> zeros(50, 0);
    const auto z = fit_zinb(zeros);
    CHECK(z.kind == CountModelKind::Empirical);
    CHECK(z.fallback == CountFallback::AllZero);
    CHECK(z.cdf(0.0) == 1.0);
    CHECK(z.cdf(7.0) == 1.0);

    const std::vector<std::int64_t> few{0, 1, 4};
    const auto f = fit_zinb(few);
    CHECK(f.fallback == CountFallback::TooFew);
    CHECK(f.cdf(0.0) == doctest::Approx(1.0 / 3));
    CHECK(f.cdf(3.5) == doctest::Approx(2.0 / 3));
  }

  TEST_CASE("no zeros collapses the inflation") {
    auto s = draw({0.0, 8.0, 3.0}, 3000, 5);
    std::erase(s, 0);
    const auto m = fit_zinb(s);
    REQUIRE(m.kind == CountModelKind::Zinb);
    CHECK(m.params.pi <= 0.01);
  }

  TEST_CASE("maximum likelihood recovers planted parameters") {
    const ZinbParams truth{0.3, 4.0, 2.0};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto m = fit_zinb(draw(truth, 5000, seed));
      REQUIRE(m.kind == CountModelKind::Zinb);
      CHECK(m.converged);
      CHECK(m.log_likelihood >= m.start_log_likelihood);
      CHECK(m.params.pi == doctest::Approx(0.3).epsilon(0.05 / 0.3));
      CHECK(std::abs(m.params.mu - 4.0) < 0.3);
      CHECK(std::abs(m.params.r - 2.0) < 0.4);
    }
  }

  TEST_CASE("histogram and sample likelihoods agree") {
    const auto s = draw({0.2, 3.0, 1.0}, 400, 9);
    const auto h = CountHistogram::from_sample(s);
    CHECK(h.total == 400.0);
    const ZinbParams p{0.25, 2.5, 1.2};
    CHECK(zinb_log_likelihood(p, h) == doctest::Approx(zinb_log_likelihood(p, s)).epsilon(1e-12));
  }

  TEST_CASE("cdf rows are monotone in [0,1]") {
    const auto m = fit_zinb(draw({0.1, 12.0, 0.8}, 800, 2));
    const auto g = std::vector<double>{0, 1, 2, 5, 10, 20, 50, 100};
    const auto row = m.cdf_row(g);
    for (std::size_t k = 0; k < row.size(); ++k) {
      CHECK(row[k] >= 0.0);
      CHECK(row[k] <= 1.0);
      if (k) CHECK(row[k] >= row[k - 1]);
    }
  }
}
