#include "stableweb/stats.hpp"

#include <algorithm>
#include <cmath>

#include "stableweb/error.hpp"

namespace stableweb {

std::vector<double> batch_means(const std::vector<double>& per_seed, int batches) {
  if (batches < 2) throw ArgumentError("need at least two batches");
  const std::size_t n = per_seed.size();
  const auto B = static_cast<std::size_t>(batches);
  if (n < B) throw ArgumentError("fewer seeds than batches");
  std::vector<double> out;
  out.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    // near-equal contiguous blocks
    const std::size_t lo = b * n / B, hi = (b + 1) * n / B;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += per_seed[i];
    out.push_back(s / static_cast<double>(hi - lo));
  }
  return out;
}

Estimate batch_mean(const std::vector<double>& per_seed, int batches) {
  const std::vector<double> m = batch_means(per_seed, batches);
  double total = 0.0;
  for (double v : per_seed) total += v;
  const double mean = total / static_cast<double>(per_seed.size());
  double bm = 0.0;
  for (double v : m) bm += v;
  bm /= static_cast<double>(m.size());
  double ss = 0.0;
  for (double v : m) ss += (v - bm) * (v - bm);
  const double var = ss / static_cast<double>(m.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(m.size()))};
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit needs matching x, y with >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("fit needs two distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) throw ArgumentError("percentile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, xs.size() - 1);
  return xs[i] + (pos - static_cast<double>(i)) * (xs[j] - xs[i]);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("KS distance needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace stableweb
