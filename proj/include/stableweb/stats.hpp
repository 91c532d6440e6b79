#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace stableweb {

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // standard error
};

// Splits per-seed values (in seed order) into `batches` contiguous groups and reports the
// mean with the standard error of the batch means. Needs at least `batches` values.
Estimate batch_mean(const std::vector<double>& per_seed, int batches = 20);

// Batch means themselves, for bootstrapping.
std::vector<double> batch_means(const std::vector<double>& per_seed, int batches = 20);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = slope x + intercept; needs two distinct x values.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct Interval95 {
  double lo = 0.0;
  double hi = 0.0;
  double sd = 0.0;  // spread of the bootstrap draws
};

// Percentile interval of a statistic over `resamples` bootstrap draws of the batch index.
// stat receives, per x point, the mean of the resampled batches.
template <class Stat>
Interval95 batch_bootstrap(const std::vector<std::vector<double>>& batches_per_point,
                           Stat&& stat, int resamples, std::uint64_t seed);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

// Upper empirical quantile used in percentile intervals.
double percentile(std::vector<double> xs, double q);

}  // namespace stableweb

#include "stableweb/stats_impl.hpp"
