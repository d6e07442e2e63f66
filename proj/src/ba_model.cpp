#include "firemarg/ba_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "firemarg/optimize.hpp"

namespace firemarg {

namespace {
constexpr double kXiZero = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double gpd_cdf(const GpdParams& p, double x) {
  if (!(p.sigma > 0.0)) throw std::invalid_argument("gpd_cdf: sigma must be positive");
  if (x < p.threshold) throw std::invalid_argument("gpd_cdf: x below threshold");
  const double y = (x - p.threshold) / p.sigma;
  if (std::abs(p.xi) < kXiZero) return -std::expm1(-y);
  const double t = 1.0 + p.xi * y;
  if (t <= 0.0) return 1.0;  // beyond the finite upper endpoint (xi < 0)
  return -std::expm1(-std::log(t) / p.xi);
}

double gpd_log_likelihood(double sigma, double xi, std::span<const double> excesses) {
  if (!(sigma > 0.0)) return -kInf;
  const double n = static_cast<double>(excesses.size());
  if (std::abs(xi) < kXiZero) {
    double s = 0.0;
    for (double y : excesses) s += y;
    return -n * std::log(sigma) - s / sigma;
  }
  double s = 0.0;
  for (double y : excesses) {
    const double t = xi * y / sigma;
    if (t <= -1.0) return -kInf;
    s += std::log1p(t);
  }
  return -n * std::log(sigma) - (1.0 + 1.0 / xi) * s;
}

GpdParams gpd_pwm_start(std::span<const double> excesses, double threshold) {
  std::vector<double> y(excesses.begin(), excesses.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  double a0 = 0.0, a1 = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    a0 += y[j];
    a1 += (n - 1.0 - static_cast<double>(j)) / (n - 1.0) * y[j];
  }
  a0 /= n;
  a1 /= n;
  const double denom = a0 - 2.0 * a1;
  GpdParams p{a0, 0.1, threshold};
  if (denom > 0.0) {
    const double k = a0 / denom - 2.0;
    p.sigma = 2.0 * a0 * a1 / denom;
    p.xi = -k;
  }
  return p;
}

GpdFit fit_gpd(std::span<const double> exceedances, double threshold, const GpdFitOptions& options) {
  if (exceedances.size() < std::max<std::size_t>(options.min_exceed, 2))
    throw FitError(FitError::Reason::TooFew, "too few exceedances for a GPD fit");
  std::vector<double> y;
  y.reserve(exceedances.size());
  for (double x : exceedances) {
    if (!(x > threshold)) throw std::invalid_argument("fit_gpd: value not above threshold");
    y.push_back(x - threshold);
  }
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*lo == *hi) throw FitError(FitError::Reason::Degenerate, "all exceedances are equal");
  const double ymax = *hi;

  GpdParams start = gpd_pwm_start(y, threshold);
  const double xi_lo = options.xi_lower + 0.1, xi_hi = options.xi_upper - 0.5;
  bool usable = start.sigma > 0.0 && std::isfinite(start.sigma) && std::isfinite(start.xi);
  if (usable) {
    start.xi = std::clamp(start.xi, xi_lo, xi_hi);
    if (start.xi < 0.0 && 1.0 + start.xi * ymax / start.sigma <= 0.0) usable = false;
  }
  if (!usable) {
    double mean = 0.0;
    for (double v : y) mean += v;
    start = {mean / static_cast<double>(y.size()), 0.1, threshold};
  }

  auto objective = [&](const std::array<double, 2>& x) {
    const double xi = x[1];
    if (!(xi > options.xi_lower) || xi > options.xi_upper || std::abs(x[0]) > 50.0) return kInf;
    const double ll = gpd_log_likelihood(std::exp(x[0]), xi, y);
    return std::isfinite(ll) ? -ll : kInf;
  };
  SimplexOptions so;
  so.max_iterations = options.max_iterations;
  so.rel_tol = options.rel_tol;
  const auto res = nelder_mead<2>(objective, {std::log(start.sigma), start.xi}, {0.2, 0.1}, so);

  GpdFit fit;
  fit.start = start;
  fit.params = {std::exp(res.x[0]), res.x[1], threshold};
  fit.log_likelihood = -res.value;
  fit.start_log_likelihood = -res.start_value;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  return fit;
}

std::string_view to_string(MixtureKind k) { return k == MixtureKind::Mixture ? "mixture" : "empirical"; }

std::string_view to_string(MixtureFallback f) {
  switch (f) {
    case MixtureFallback::None: return "none";
    case MixtureFallback::Empty: return "empty";
    case MixtureFallback::ZeroMass: return "zero_mass";
    case MixtureFallback::FewExceedances: return "few_exceedances";
    case MixtureFallback::DegenerateTail: return "degenerate_tail";
    case MixtureFallback::NotConverged: return "not_converged";
  }
  return "?";
}

BaMixture fit_mixture(std::span<const double> sample, double k2, const MixtureOptions& options) {
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  return fit_mixture_sorted(sorted, k2, options);
}

BaMixture fit_mixture_sorted(std::span<const double> sorted, double k2,
                             const MixtureOptions& options) {
  if (!(k2 > 0.0 && k2 < 1.0)) throw std::invalid_argument("fit_mixture: k2 outside (0,1)");
  BaMixture m;
  m.k2 = k2;
  m.lambda = 1.0 - k2;
  m.upper_bound = options.upper_bound;
  m.sample_size = sorted.size();
  if (sorted.empty()) {
    m.fallback = MixtureFallback::Empty;
    return m;
  }
  if (!(sorted.front() >= 0.0)) throw std::invalid_argument("fit_mixture: negative value");

  const auto first_pos = std::upper_bound(sorted.begin(), sorted.end(), 0.0);
  const auto zeros = static_cast<std::size_t>(first_pos - sorted.begin());
  m.z = static_cast<double>(zeros) / static_cast<double>(sorted.size());
  m.full = EmpiricalCdf::from_sorted(sorted);
  m.u = m.full.quantile(k2);
  const auto above = std::upper_bound(sorted.begin(), sorted.end(), m.u);
  m.exceedances = static_cast<std::size_t>(sorted.end() - above);

  if (!(m.z < 1.0 - m.lambda)) {
    m.fallback = MixtureFallback::ZeroMass;
    return m;
  }
  if (m.exceedances < options.gpd.min_exceed) {
    m.fallback = MixtureFallback::FewExceedances;
    return m;
  }
  m.bulk = EmpiricalCdf::from_sorted(std::span<const double>(first_pos, sorted.end()));
  if (!(m.bulk(m.u) > 0.0)) {
    m.fallback = MixtureFallback::ZeroMass;
    return m;
  }
  try {
    GpdFit fit = fit_gpd(std::span<const double>(above, sorted.end()), m.u, options.gpd);
    if (!fit.converged) {
      m.fallback = MixtureFallback::NotConverged;
      m.gpd = fit;
      return m;
    }
    m.gpd = fit;
  } catch (const FitError&) {
    m.fallback = MixtureFallback::DegenerateTail;
    return m;
  }
  m.kind = MixtureKind::Mixture;
  return m;
}

double BaMixture::cdf(double x) const {
  if (x < 0.0) return 0.0;
  if (x >= upper_bound) return 1.0;
  if (kind == MixtureKind::Empirical) return full(x);
  if (x == 0.0) return z;
  if (x <= u) return (1.0 - lambda - z) / bulk(u) * bulk(x) + z;
  return 1.0 - lambda * (1.0 - gpd_cdf(gpd->params, x));
}

double mixture_cdf(const BaMixture& model, double x) { return model.cdf(x); }

}  // namespace firemarg
