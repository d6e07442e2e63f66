#pragma once

// Semi-parametric burnt-area-proportion marginal: point mass at zero,
// empirical bulk and a generalised Pareto (GPD) upper tail.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "firemarg/ecdf.hpp"

namespace firemarg {

struct GpdParams {
  double sigma = 1.0;
  double xi = 0.0;
  double threshold = 0.0;
};

/// H_u(x) = 1 - [1 + xi (x - u) / sigma]_+^(-1/xi); |xi| < 1e-8 uses the
/// exponential limit. Throws for x < u.
double gpd_cdf(const GpdParams& p, double x);

/// Log-likelihood of excesses y = x - u > 0; -inf outside the support.
double gpd_log_likelihood(double sigma, double xi, std::span<const double> excesses);

class FitError : public std::runtime_error {
 public:
  enum class Reason { TooFew, Degenerate };
  FitError(Reason reason, const char* what) : std::runtime_error(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

struct GpdFitOptions {
  std::size_t min_exceed = 10;
  int max_iterations = 500;
  double rel_tol = 1e-8;
  double xi_lower = -1.0;  // exclusive
  double xi_upper = 5.0;   // inclusive
};

struct GpdFit {
  GpdParams params;
  GpdParams start;
  double log_likelihood = 0.0;
  double start_log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Probability-weighted-moment estimates (Hosking-Wallis) from excesses.
GpdParams gpd_pwm_start(std::span<const double> excesses, double threshold);

/// Maximum likelihood over (log sigma, xi) for values strictly above `threshold`.
/// Throws FitError on too few values or when all values coincide.
GpdFit fit_gpd(std::span<const double> exceedances, double threshold,
               const GpdFitOptions& options = {});

enum class MixtureKind { Mixture, Empirical };

enum class MixtureFallback { None, Empty, ZeroMass, FewExceedances, DegenerateTail, NotConverged };

std::string_view to_string(MixtureKind k);
std::string_view to_string(MixtureFallback f);

struct BaMixture {
  MixtureKind kind = MixtureKind::Empirical;
  double z = 0.0;       // Pr(BAP = 0)
  double u = 0.0;       // GPD threshold
  double lambda = 0.0;  // Pr(BAP > u) = 1 - k2
  double k2 = 0.5;
  EmpiricalCdf bulk;    // F*, strictly positive values
  EmpiricalCdf full;    // whole sample, used by the empirical kind
  std::optional<GpdFit> gpd;
  std::size_t sample_size = 0;
  std::size_t exceedances = 0;
  double upper_bound = 1.0;  // BAP cannot exceed the cell
  MixtureFallback fallback = MixtureFallback::None;

  double cdf(double x) const;
};

struct MixtureOptions {
  GpdFitOptions gpd;
  double upper_bound = 1.0;
};

/// z from the zero fraction, u the left-continuous empirical k2-quantile,
/// lambda = 1 - k2. Uses the GPD tail when z < 1 - lambda and enough values
/// lie strictly above u; otherwise the full-sample ECDF.
BaMixture fit_mixture(std::span<const double> sample, double k2, const MixtureOptions& options = {});
/// Same, for a sample already sorted ascending.
BaMixture fit_mixture_sorted(std::span<const double> sorted, double k2,
                             const MixtureOptions& options = {});

double mixture_cdf(const BaMixture& model, double x);

}  // namespace firemarg
