#include "firemarg/count_model.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "firemarg/optimize.hpp"

namespace firemarg {

void ZinbParams::validate() const {
  if (!(pi >= 0.0 && pi <= 1.0) || !(mu > 0.0) || !(r > 0.0) || !std::isfinite(mu) ||
      !std::isfinite(r))
    throw std::invalid_argument(fmt::format("invalid ZINB parameters (pi={}, mu={}, r={})", pi, mu, r));
}

namespace {

double nb_log_pmf(double mu, double r, std::int64_t j) {
  const double jd = static_cast<double>(j);
  const double log_p = std::log(r / (r + mu));
  const double log_q = std::log(mu / (r + mu));
  return std::lgamma(jd + r) - std::lgamma(r) - std::lgamma(jd + 1.0) + r * log_p + jd * log_q;
}

double zinb_log_pmf_unchecked(const ZinbParams& p, std::int64_t j) {
  if (j < 0) return -std::numeric_limits<double>::infinity();
  if (j == 0) {
    if (p.pi >= 1.0) return 0.0;
    const double g0 = std::exp(p.r * std::log(p.r / (p.r + p.mu)));
    return std::log(p.pi + (1.0 - p.pi) * g0);
  }
  if (p.pi >= 1.0) return -std::numeric_limits<double>::infinity();
  return std::log1p(-p.pi) + nb_log_pmf(p.mu, p.r, j);
}

double zinb_cdf_unchecked(const ZinbParams& p, double u) {
  if (u < 0.0) return 0.0;
  if (p.pi >= 1.0) return 1.0;
  const double j = std::floor(u);
  // Negative binomial CDF: I_{r/(r+mu)}(r, j + 1).
  const double nb = boost::math::ibeta(p.r, j + 1.0, p.r / (p.r + p.mu));
  return std::min(1.0, p.pi + (1.0 - p.pi) * nb);
}

}  // namespace

double zinb_log_pmf(const ZinbParams& p, std::int64_t j) {
  p.validate();
  return zinb_log_pmf_unchecked(p, j);
}

double zinb_pmf(const ZinbParams& p, std::int64_t j) { return std::exp(zinb_log_pmf(p, j)); }

double zinb_cdf(const ZinbParams& p, double u) {
  p.validate();
  return zinb_cdf_unchecked(p, u);
}

std::vector<double> zinb_cdf_row(const ZinbParams& p, std::span<const double> thresholds) {
  p.validate();
  std::vector<double> row;
  row.reserve(thresholds.size());
  for (double u : thresholds) {
    double v = zinb_cdf_unchecked(p, u);
    if (!row.empty()) v = std::max(v, row.back());
    row.push_back(v);
  }
  return row;
}

CountHistogram CountHistogram::from_sample(std::span<const std::int64_t> sample) {
  std::vector<std::int64_t> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  CountHistogram h;
  for (std::int64_t v : sorted) {
    if (v < 0) throw std::invalid_argument("negative count in sample");
    if (h.values.empty() || h.values.back() != v) {
      h.values.push_back(v);
      h.weights.push_back(0.0);
    }
    h.weights.back() += 1.0;
  }
  h.total = static_cast<double>(sorted.size());
  return h;
}

double zinb_log_likelihood(const ZinbParams& p, const CountHistogram& h) {
  double ll = 0.0;
  const double log_p = std::log(p.r / (p.r + p.mu));
  const double log_q = std::log(p.mu / (p.r + p.mu));
  const double lg_r = std::lgamma(p.r);
  const double log1m_pi = std::log1p(-p.pi);
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    const double j = static_cast<double>(h.values[k]);
    double lp;
    if (h.values[k] == 0) {
      lp = std::log(p.pi + (1.0 - p.pi) * std::exp(p.r * log_p));
    } else {
      lp = log1m_pi + std::lgamma(j + p.r) - lg_r - std::lgamma(j + 1.0) + p.r * log_p + j * log_q;
    }
    ll += h.weights[k] * lp;
  }
  return ll;
}

double zinb_log_likelihood(const ZinbParams& p, std::span<const std::int64_t> sample) {
  p.validate();
  return zinb_log_likelihood(p, CountHistogram::from_sample(sample));
}

ZinbParams zinb_moment_start(const CountHistogram& h) {
  double n = h.total, sum = 0.0, sum2 = 0.0, zeros = 0.0, pos = 0.0, pos_sum = 0.0;
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    const double v = static_cast<double>(h.values[k]), w = h.weights[k];
    sum += w * v;
    sum2 += w * v * v;
    if (h.values[k] == 0) {
      zeros += w;
    } else {
      pos += w;
      pos_sum += w * v;
    }
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  double r0 = var > mean ? mean * mean / (var - mean) : 1e3;
  r0 = std::clamp(r0, 1e-3, 1e3);
  const double mu0 = pos > 0 ? std::max(pos_sum / pos, 1e-3) : 1e-3;
  const double g0 = std::exp(r0 * std::log(r0 / (r0 + mu0)));
  const double p0 = zeros / n;
  double pi0 = g0 < 1.0 ? (p0 - g0) / (1.0 - g0) : 0.5;
  pi0 = std::clamp(pi0, 1e-3, 0.99);
  return {pi0, mu0, r0};
}

std::string_view to_string(CountModelKind k) { return k == CountModelKind::Zinb ? "zinb" : "empirical"; }

std::string_view to_string(CountFallback f) {
  switch (f) {
    case CountFallback::None: return "none";
    case CountFallback::Empty: return "empty";
    case CountFallback::AllZero: return "all_zero";
    case CountFallback::TooFew: return "too_few";
    case CountFallback::NotConverged: return "not_converged";
  }
  return "?";
}

double CountModel::cdf(double u) const {
  if (kind == CountModelKind::Zinb) return zinb_cdf_unchecked(params, u);
  return empirical(u);
}

std::vector<double> CountModel::cdf_row(std::span<const double> thresholds) const {
  if (kind == CountModelKind::Zinb) return zinb_cdf_row(params, thresholds);
  std::vector<double> row;
  row.reserve(thresholds.size());
  for (double u : thresholds) row.push_back(empirical(u));
  return row;
}

CountModel fit_zinb(std::span<const std::int64_t> sample, const ZinbFitOptions& options) {
  CountModel model;
  model.sample_size = sample.size();
  std::vector<double> values(sample.begin(), sample.end());
  model.empirical = EmpiricalCdf(std::move(values));
  if (sample.empty()) {
    model.fallback = CountFallback::Empty;
    return model;
  }
  const auto h = CountHistogram::from_sample(sample);
  if (h.values.size() == 1 && h.values.front() == 0) {
    model.fallback = CountFallback::AllZero;
    return model;
  }
  if (sample.size() < options.min_fit) {
    model.fallback = CountFallback::TooFew;
    return model;
  }

  const ZinbParams start = zinb_moment_start(h);
  auto to_params = [](const std::array<double, 3>& x) {
    return ZinbParams{1.0 / (1.0 + std::exp(-x[0])), std::exp(x[1]), std::exp(x[2])};
  };
  auto objective = [&](const std::array<double, 3>& x) {
    if (std::abs(x[0]) > 30.0 || std::abs(x[1]) > 20.0 || std::abs(x[2]) > 20.0)
      return std::numeric_limits<double>::infinity();
    const double ll = zinb_log_likelihood(to_params(x), h);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };
  const std::array<double, 3> x0{std::log(start.pi / (1.0 - start.pi)), std::log(start.mu),
                                 std::log(start.r)};
  SimplexOptions so;
  so.max_iterations = options.max_iterations;
  so.rel_tol = options.rel_tol;
  const auto res = nelder_mead<3>(objective, x0, {0.5, 0.3, 0.5}, so);

  model.start_log_likelihood = -res.start_value;
  model.log_likelihood = -res.value;
  model.iterations = res.iterations;
  model.converged = res.converged;
  model.params = to_params(res.x);
  if (!res.converged) {
    model.fallback = CountFallback::NotConverged;
    return model;
  }
  model.kind = CountModelKind::Zinb;
  return model;
}

}  // namespace firemarg
