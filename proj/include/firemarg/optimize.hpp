#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace firemarg {

struct SimplexOptions {
  int max_iterations = 500;
  double rel_tol = 1e-8;   // on the spread of objective values across the simplex
  double abs_tol = 1e-12;
};

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x{};
  double value = std::numeric_limits<double>::infinity();
  double start_value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead minimisation. Infeasible points may return +inf; the start must be
/// finite. The best vertex never gets worse, so value <= start_value always holds.
/// A converged run is restarted once from its best vertex to catch a collapsed
/// simplex; the restart counts against the same iteration budget.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, std::array<double, N> start, std::array<double, N> step,
                             const SimplexOptions& opt = {}) {
  using Point = std::array<double, N>;
  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

  SimplexResult<N> result;
  result.start_value = f(start);
  result.x = start;
  result.value = result.start_value;
  if (!std::isfinite(result.start_value)) return result;

  std::array<Point, N + 1> pts;
  std::array<double, N + 1> vals;
  int iter = 0;

  for (int round = 0; round < 2; ++round) {
    pts[0] = result.x;
    vals[0] = result.value;
    for (std::size_t i = 0; i < N; ++i) {
      pts[i + 1] = result.x;
      pts[i + 1][i] += step[i];
      vals[i + 1] = f(pts[i + 1]);
      if (!std::isfinite(vals[i + 1])) {
        pts[i + 1][i] = result.x[i] - step[i];
        vals[i + 1] = f(pts[i + 1]);
      }
    }
    bool converged = false;
    std::array<std::size_t, N + 1> order;
    while (iter < opt.max_iterations) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[N - 1];
      const double spread = vals[worst] - vals[best];
      if (std::isfinite(spread) &&
          spread <= opt.rel_tol * std::abs(vals[best]) + opt.abs_tol) {
        converged = true;
        break;
      }
      ++iter;

      Point centroid{};
      for (std::size_t k = 0; k <= N; ++k) {
        if (k == worst) continue;
        for (std::size_t d = 0; d < N; ++d) centroid[d] += pts[k][d] / static_cast<double>(N);
      }
      auto along = [&](double t) {
        Point p;
        for (std::size_t d = 0; d < N; ++d) p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
        return p;
      };

      Point xr = along(-alpha);
      double fr = f(xr);
      if (fr < vals[best]) {
        Point xe = along(-alpha * gamma);
        double fe = f(xe);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      const bool outside = fr < vals[worst];
      Point xc = along(outside ? -alpha * rho : rho);
      double fc = f(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t k = 0; k <= N; ++k) {
        if (k == best) continue;
        for (std::size_t d = 0; d < N; ++d)
          pts[k][d] = pts[best][d] + shrink * (pts[k][d] - pts[best][d]);
        vals[k] = f(pts[k]);
      }
    }
    const std::size_t best = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    if (vals[best] < result.value) {
      result.value = vals[best];
      result.x = pts[best];
    }
    result.converged = converged;
    if (!converged) break;
  }
  result.iterations = iter;
  return result;
}

}  // namespace firemarg
