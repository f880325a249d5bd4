#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lsv {

struct Interval {
  double low = 0.0;
  double high = 1.0;
  double width() const noexcept { return high - low; }
  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion, clamped to [0, 1] and
/// widened if needed so it always contains hits / trials.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = kZ95);

double normal_cdf(double x);
/// CDF of |N(0,1)|.
double half_normal_cdf(double x);

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// sup |F_n - F| for the empirical CDF of `samples` against `cdf`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace lsv
