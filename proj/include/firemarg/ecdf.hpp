#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace firemarg {

/// Right-continuous step ECDF, F(x) = #{x_i <= x} / n.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  /// Takes values that are already in ascending order.
  static EmpiricalCdf from_sorted(std::span<const double> sorted) {
    EmpiricalCdf e;
    e.sorted_.assign(sorted.begin(), sorted.end());
    return e;
  }

  bool empty() const noexcept { return sorted_.empty(); }
  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& values() const noexcept { return sorted_; }

  double operator()(double x) const {
    if (sorted_.empty()) throw std::logic_error("EmpiricalCdf: empty sample");
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  /// Left-continuous inverse: the order statistic x_(ceil(p n)), p in (0,1].
  double quantile(double p) const {
    if (sorted_.empty()) throw std::logic_error("EmpiricalCdf: empty sample");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("EmpiricalCdf: p outside (0,1]");
    const double n = static_cast<double>(sorted_.size());
    // Guard p*n landing a hair above an integer through rounding.
    auto k = static_cast<std::size_t>(std::ceil(p * n - 1e-9 * n));
    k = std::clamp<std::size_t>(k, 1, sorted_.size());
    return sorted_[k - 1];
  }

 private:
  std::vector<double> sorted_;
};

}  // namespace firemarg
