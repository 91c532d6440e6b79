#pragma once

#include <cmath>
#include <random>

#include "stableweb/error.hpp"

namespace stableweb {

template <class Stat>
Interval95 batch_bootstrap(const std::vector<std::vector<double>>& batches_per_point,
                           Stat&& stat, int resamples, std::uint64_t seed) {
  if (batches_per_point.empty() || resamples < 2) throw ArgumentError("bootstrap needs data");
  const std::size_t B = batches_per_point.front().size();
  for (const auto& v : batches_per_point)
    if (v.size() != B || B == 0) throw ArgumentError("bootstrap needs equal batch counts");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, B - 1);
  std::vector<double> draws;
  std::vector<std::size_t> idx(B);
  std::vector<double> means(batches_per_point.size());
  for (int r = 0; r < resamples; ++r) {
    // the same batch indices for every point keep the seed-level pairing
    for (std::size_t& i : idx) i = pick(rng);
    for (std::size_t p = 0; p < batches_per_point.size(); ++p) {
      double s = 0.0;
      for (std::size_t i : idx) s += batches_per_point[p][i];
      means[p] = s / static_cast<double>(B);
    }
    const std::optional<double> v = stat(means);
    if (v) draws.push_back(*v);
  }
  if (draws.empty()) throw ExperimentError("no bootstrap resample produced a statistic");
  double m = 0.0;
  for (double d : draws) m += d;
  m /= static_cast<double>(draws.size());
  double ss = 0.0;
  for (double d : draws) ss += (d - m) * (d - m);
  const double sd = draws.size() > 1 ? std::sqrt(ss / static_cast<double>(draws.size() - 1)) : 0.0;
  return {percentile(draws, 0.025), percentile(draws, 0.975), sd};
}

}  // namespace stableweb
