#pragma once

// Zero-inflated negative binomial (ZINB) marginal for fire counts.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "firemarg/ecdf.hpp"

namespace firemarg {

/// pi: zero-inflation weight; mu, r: mean and size of the negative binomial part.
struct ZinbParams {
  double pi = 0.0;
  double mu = 1.0;
  double r = 1.0;

  void validate() const;
};

double zinb_log_pmf(const ZinbParams& p, std::int64_t j);
double zinb_pmf(const ZinbParams& p, std::int64_t j);
/// Sum of the pmf over j <= floor(u); 0 for u < 0.
double zinb_cdf(const ZinbParams& p, double u);
std::vector<double> zinb_cdf_row(const ZinbParams& p, std::span<const double> thresholds);

/// Counts compressed to (value, multiplicity) pairs, ascending by value.
struct CountHistogram {
  std::vector<std::int64_t> values;
  std::vector<double> weights;
  double total = 0.0;

  static CountHistogram from_sample(std::span<const std::int64_t> sample);
};

double zinb_log_likelihood(const ZinbParams& p, const CountHistogram& h);
double zinb_log_likelihood(const ZinbParams& p, std::span<const std::int64_t> sample);

/// Moment-based start: pi from excess zeros, mu from the positive part,
/// r by method of moments clipped to [1e-3, 1e3].
ZinbParams zinb_moment_start(const CountHistogram& h);

struct ZinbFitOptions {
  std::size_t min_fit = 10;
  int max_iterations = 500;
  double rel_tol = 1e-8;
};

enum class CountModelKind { Zinb, Empirical };

enum class CountFallback { None, Empty, AllZero, TooFew, NotConverged };

std::string_view to_string(CountModelKind k);
std::string_view to_string(CountFallback f);

struct CountModel {
  CountModelKind kind = CountModelKind::Empirical;
  ZinbParams params;
  EmpiricalCdf empirical;
  std::size_t sample_size = 0;
  double log_likelihood = 0.0;
  double start_log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  CountFallback fallback = CountFallback::None;

  double cdf(double u) const;
  std::vector<double> cdf_row(std::span<const double> thresholds) const;
};

/// Maximum likelihood over (logit pi, log mu, log r). Falls back to the
/// empirical CDF for all-zero samples, fewer than min_fit values, or when
/// the optimiser does not converge. An empty sample yields an empty
/// empirical model whose cdf() throws.
CountModel fit_zinb(std::span<const std::int64_t> sample, const ZinbFitOptions& options = {});

}  // namespace firemarg
