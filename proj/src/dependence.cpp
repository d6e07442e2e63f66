#include "firemarg/dependence.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "firemarg/parallel.hpp"

namespace firemarg {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("need at least two pairs");
}

// Pairs sharing a value within runs of a sorted sequence.
template <class Eq>
std::uint64_t tied_pairs(std::size_t n, Eq&& same) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k < n && same(k - 1, k)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[order[a]] == x[order[b]]; });
  const std::uint64_t n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });
  std::vector<double> ys(n), buf(n);
  for (std::size_t k = 0; k < n; ++k) ys[k] = y[order[k]];
  const std::uint64_t swaps = merge_count(ys, buf, 0, n);
  const std::uint64_t n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  if (n1 == n0 || n2 == n0) throw std::domain_error("kendall_tau_b: constant variable");
  const auto num = static_cast<double>(static_cast<std::int64_t>(n0 - n1 - n2 + n3) -
                                       2 * static_cast<std::int64_t>(swaps));
  // sqrt(fl(a * a)) == a, so identical rankings give exactly +-1.
  const double den = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  return std::clamp(num / den, -1.0, 1.0);
}

std::vector<double> scaled_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n;) {
    std::size_t e = k + 1;
    while (e < n && v[order[e]] == v[order[k]]) ++e;
    const double mid = (static_cast<double>(k + 1) + static_cast<double>(e)) / 2.0;
    for (std::size_t m = k; m < e; ++m) r[order[m]] = mid / static_cast<double>(n + 1);
    k = e;
  }
  return r;
}

double chi_u(std::span<const double> x, std::span<const double> y, double u) {
  check_pair(x, y);
  const auto fx = scaled_ranks(x), fy = scaled_ranks(y);
  std::size_t above = 0, joint = 0;
  for (std::size_t k = 0; k < fx.size(); ++k) {
    if (fx[k] > u) {
      ++above;
      joint += fy[k] > u;
    }
  }
  if (above == 0) throw std::domain_error(fmt::format("chi_u: no exceedance of level {}", u));
  return static_cast<double>(joint) / static_cast<double>(above);
}

double chibar_u(std::span<const double> x, std::span<const double> y, double u) {
  check_pair(x, y);
  const auto fx = scaled_ranks(x), fy = scaled_ranks(y);
  std::size_t ay = 0, joint = 0;
  for (std::size_t k = 0; k < fx.size(); ++k) {
    ay += fy[k] > u;
    joint += fy[k] > u && fx[k] > u;
  }
  const double n = static_cast<double>(fx.size());
  if (joint == 0) throw std::domain_error(fmt::format("chibar_u: no joint exceedance of level {}", u));
  if (ay == fx.size()) throw std::domain_error(fmt::format("chibar_u: every F_Y exceeds {}", u));
  if (joint == fx.size()) throw std::domain_error(fmt::format("chibar_u: every pair exceeds {}", u));
  return 2.0 * std::log(static_cast<double>(ay) / n) / std::log(static_cast<double>(joint) / n) - 1.0;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapInterval bootstrap_ci(const PairStatistic& statistic, std::span<const double> x,
                               std::span<const double> y, double level, std::size_t B,
                               std::uint64_t seed, unsigned workers) {
  check_pair(x, y);
  if (B < 100) throw std::invalid_argument("bootstrap_ci: need at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level outside (0,1)");
  constexpr int kMaxAttempts = 100;
  const std::size_t n = x.size();
  std::vector<double> stats(B);
  std::vector<std::size_t> redraws(B, 0);
  std::vector<char> failed(B, 0);
  parallel_indices(B, workers, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(seq);
    boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> xs(n), ys(n);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = pick(rng);
        xs[k] = x[i];
        ys[k] = y[i];
      }
      try {
        stats[b] = statistic(xs, ys);
        return;
      } catch (const std::domain_error&) {
        ++redraws[b];
      }
    }
    failed[b] = 1;
  });
  if (std::any_of(failed.begin(), failed.end(), [](char f) { return f != 0; }))
    throw std::runtime_error("bootstrap_ci: statistic undefined on too many resamples");
  std::sort(stats.begin(), stats.end());
  BootstrapInterval ci;
  ci.lo = percentile(stats, (1.0 - level) / 2.0);
  ci.hi = percentile(stats, (1.0 + level) / 2.0);
  ci.redraws = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});
  return ci;
}

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::NE: return "NE";
    case Quadrant::SE: return "SE";
    case Quadrant::SW: return "SW";
    case Quadrant::NW: return "NW";
  }
  return "?";
}

Quadrant quadrant_of(double lon, double lat) {
  const bool north = lat > 37.5;
  const bool east = lon > -100.0;  // fewer than 100 degrees west
  if (north) return east ? Quadrant::NE : Quadrant::NW;
  return east ? Quadrant::SE : Quadrant::SW;
}

std::array<std::vector<std::size_t>, 4> quadrant_split(const Dataset& data) {
  std::array<std::vector<std::size_t>, 4> out;
  for (const auto& o : data.observations())
    out[static_cast<std::size_t>(quadrant_of(o.lon, o.lat))].push_back(o.index);
  return out;
}

namespace {

Estimate estimate(const PairStatistic& f, const std::vector<double>& x, const std::vector<double>& y,
                  const ExploreOptions& opt, std::uint64_t seed) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Estimate e{nan, nan, nan};
  try {
    e.value = f(x, y);
    const auto ci = bootstrap_ci(f, x, y, opt.ci_level, opt.replicates, seed, opt.workers);
    e.lo = ci.lo;
    e.hi = ci.hi;
  } catch (const std::domain_error&) {
  } catch (const std::invalid_argument&) {
  } catch (const std::runtime_error&) {
  }
  return e;
}

}  // namespace

std::vector<DependenceReport> explore(const Dataset& data, const ExploreOptions& options) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> regions;
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  regions.emplace_back("all", std::move(all));
  const auto quads = quadrant_split(data);
  for (std::size_t q = 0; q < 4; ++q)
    regions.emplace_back(std::string(to_string(static_cast<Quadrant>(q))), quads[q]);

  std::vector<DependenceReport> out;
  std::uint64_t stream = 0;
  for (const auto& [label, ids] : regions) {
    std::vector<double> x, y;
    for (std::size_t i : ids) {
      const auto& o = data[i];
      if (o.cnt && o.ba) {
        x.push_back(static_cast<double>(*o.cnt));
        y.push_back(*o.ba);
      }
    }
    // Each estimate gets its own seed so reports do not share resamples.
    const Estimate tau = estimate(
        [](auto a, auto b) { return kendall_tau_b(a, b); }, x, y, options, options.seed + stream++);
    for (double u : options.levels) {
      DependenceReport r;
      r.region = label;
      r.u = u;
      r.n = x.size();
      r.tau = tau;
      r.chi = estimate([u](auto a, auto b) { return chi_u(a, b, u); }, x, y, options,
                       options.seed + stream++);
      r.chibar = estimate([u](auto a, auto b) { return chibar_u(a, b, u); }, x, y, options,
                          options.seed + stream++);
      out.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

std::string fmt_value(double v) { return std::isnan(v) ? "NA" : fmt::format("{}", v); }

}  // namespace

void write_dependence_csv(std::span<const DependenceReport> reports, std::ostream& out) {
  out << "region,u,n,tau,tau_lo,tau_hi,chi,chi_lo,chi_hi,chibar,chibar_lo,chibar_hi\n";
  for (const auto& r : reports) {
    fmt::print(out, "{},{},{}", r.region, r.u, r.n);
    for (const Estimate* e : {&r.tau, &r.chi, &r.chibar})
      fmt::print(out, ",{},{},{}", fmt_value(e->value), fmt_value(e->lo), fmt_value(e->hi));
    out << '\n';
  }
}

TrendResult linear_trend(std::span<const double> t, std::span<const double> mean,
                         std::string variable) {
  if (t.size() != mean.size()) throw std::invalid_argument("linear_trend: length mismatch");
  if (t.size() < 3) throw std::invalid_argument("linear_trend: need at least three points");
  const double n = static_cast<double>(t.size());
  const double tbar = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ybar = std::accumulate(mean.begin(), mean.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    sxx += (t[k] - tbar) * (t[k] - tbar);
    sxy += (t[k] - tbar) * (mean[k] - ybar);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_trend: constant time points");
  TrendResult r;
  r.variable = std::move(variable);
  r.years = t.size();
  r.slope = sxy / sxx;
  r.intercept = ybar - r.slope * tbar;
  double rss = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = mean[k] - r.intercept - r.slope * t[k];
    rss += e * e;
  }
  const double df = n - 2.0;
  r.std_error = std::sqrt(rss / df / sxx);
  if (r.std_error > 0.0) {
    r.t = r.slope / r.std_error;
    boost::math::students_t dist(df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  } else {
    r.t = r.slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.slope);
    r.p_value = r.slope == 0.0 ? 1.0 : 0.0;
  }
  r.significant = r.p_value < 0.05;
  return r;
}

std::array<TrendResult, 2> annual_trends(const Dataset& data) {
  std::array<TrendResult, 2> out;
  for (Variable v : {Variable::Count, Variable::BurntArea}) {
    std::map<int, std::pair<double, std::size_t>> acc;
    for (const auto& o : data.observations()) {
      if (o.missing(v)) continue;
      auto& [sum, n] = acc[o.year];
      sum += v == Variable::Count ? static_cast<double>(*o.cnt) : *o.ba;
      ++n;
    }
    std::vector<double> t, m;
    for (const auto& [year, sn] : acc) {
      t.push_back(year);
      m.push_back(sn.first / static_cast<double>(sn.second));
    }
    out[v == Variable::Count ? 0 : 1] = linear_trend(t, m, std::string(to_string(v)));
  }
  return out;
}

void write_trend_csv(std::span<const TrendResult> trends, std::ostream& out) {
  out << "variable,years,slope,intercept,std_error,t,p_value,significant\n";
  for (const auto& r : trends)
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", r.variable, r.years, r.slope, r.intercept,
               r.std_error, r.t, r.p_value, r.significant ? 1 : 0);
}

}  // namespace firemarg
