#include "stableweb/collection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stableweb/error.hpp"

namespace stableweb {

PathCollection::PathCollection(std::vector<AgedPath> paths, double horizon, std::string label)
    : paths_(std::move(paths)), horizon_(horizon), label_(std::move(label)) {
  for (const AgedPath& p : paths_)
    if (std::fabs(p.horizon() - horizon_) > 1e-9 * std::max(1.0, std::fabs(horizon_)))
      throw ArgumentError("all paths in a collection must share its horizon");
}

bool agrees_on(const TruncatedPath& x, const TruncatedPath& y, double tol) {
  if (y.b > x.b + kBreakpointTol * std::max(1.0, std::fabs(x.b))) return false;
  // pairs that only merge later already differ at x.b
  if (std::fabs(x.gamma.eval(x.b) - y.gamma.eval(x.b)) > tol ||
      std::fabs(x.age.eval(x.b) - y.age.eval(x.b)) > tol)
    return false;
  std::vector<double> knots{x.b, x.t};
  auto add = [&](const PiecewisePath& f) {
    const auto segs = f.segments();
    auto it = std::upper_bound(segs.begin(), segs.end(), x.b,
                               [](double v, const Segment& sg) { return v < sg.start; });
    for (; it != segs.end() && it->start < x.t; ++it) knots.push_back(it->start);
  };
  add(x.gamma);
  add(x.age);
  add(y.gamma);
  add(y.age);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  for (double u : knots) {
    if (std::fabs(x.gamma.eval(u) - y.gamma.eval(u)) > tol) return false;
    if (std::fabs(x.age.eval(u) - y.age.eval(u)) > tol) return false;
    if (u > x.b) {
      if (std::fabs(x.gamma.eval_left(u) - y.gamma.eval_left(u)) > tol) return false;
      if (std::fabs(x.age.eval_left(u) - y.age.eval_left(u)) > tol) return false;
    }
  }
  return true;
}

std::vector<TruncatedPath> project_collection_h(const PathCollection& G, double t,
                                                double threshold) {
  if (t > G.horizon() + 1e-12 * std::max(1.0, t))
    throw ArgumentError("projection time beyond the collection horizon");
  std::vector<TruncatedPath> all;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (auto tp = project_h(G.paths()[i], t, threshold)) {
      tp->source = i;
      all.push_back(std::move(*tp));
    }
  }
  return maximal_elements(std::move(all));
}

std::vector<TruncatedPath> maximal_elements(std::vector<TruncatedPath> all) {
  // Only projections ending at the same (gamma, age) point can agree; sort by the
  // endpoint so each candidate is compared against a short neighbourhood.
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> gend(all.size()), aend(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    gend[i] = all[i].gamma.eval(all[i].t);
    aend[i] = all[i].age.eval(all[i].t);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gend[a] != gend[b] ? gend[a] < gend[b] : all[a].source < all[b].source;
  });
  std::vector<bool> drop(all.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t x = order[oi];
    auto dominated_by = [&](std::size_t y) {
      if (std::fabs(aend[y] - aend[x]) > kAgreeTol) return false;
      const double btol = kBreakpointTol * std::max(1.0, std::fabs(all[x].b));
      const bool earlier = all[y].b < all[x].b - btol;
      const bool tie = !earlier && std::fabs(all[y].b - all[x].b) <= btol &&
                       (all[y].source < all[x].source || (all[y].source == all[x].source && y < x));
      if (!earlier && !tie) return false;
      return agrees_on(all[x], all[y]);
    };
    bool dominated = false;
    for (std::size_t oj = oi; oj-- > 0 && !dominated;) {
      if (gend[x] - gend[order[oj]] > kAgreeTol) break;
      dominated = dominated_by(order[oj]);
    }
    for (std::size_t oj = oi + 1; oj < order.size() && !dominated; ++oj) {
      if (gend[order[oj]] - gend[x] > kAgreeTol) break;
      dominated = dominated_by(order[oj]);
    }
    drop[x] = dominated;
  }
  std::vector<TruncatedPath> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (!drop[i]) out.push_back(std::move(all[i]));
  return out;
}

std::vector<TruncatedPath> project_collection(const PathCollection& G, double t) {
  if (!(t >= 1.0)) throw ArgumentError("projection needs t >= 1");
  return project_collection_h(G, t, std::exp2(-t));
}

PathDistance pair_dist(const TruncatedPath& x, const TruncatedPath& y, double resolution,
                       double cap) {
  const PathDistance dg = path_dist(x.gamma, y.gamma, resolution, cap);
  const PathDistance da = path_dist(x.age, y.age, resolution, cap);
  return {std::max(dg.value, da.value), std::max(dg.tolerance, da.tolerance)};
}

double hausdorff(const std::vector<TruncatedPath>& A, const std::vector<TruncatedPath>& B,
                 double resolution, double cap) {
  if (A.empty() && B.empty()) return 0.0;
  if (A.empty() || B.empty()) return std::min(1.0, cap);
  std::vector<double> row_min(A.size(), std::numeric_limits<double>::infinity());
  std::vector<double> col_min(B.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < B.size(); ++j) {
      const double d = pair_dist(A[i], B[j], resolution, cap).value;
      row_min[i] = std::min(row_min[i], d);
      col_min[j] = std::min(col_min[j], d);
    }
  const double h = std::max(*std::max_element(row_min.begin(), row_min.end()),
                            *std::max_element(col_min.begin(), col_min.end()));
  return std::min(h, cap);
}

ThresholdFunction::ThresholdFunction(std::string name, std::function<double(double)> h)
    : name_(std::move(name)), h_(std::move(h)) {
  if (!h_) throw ArgumentError("threshold function is empty");
}

ThresholdFunction ThresholdFunction::dyadic() {
  return {"dyadic", [](double t) { return std::exp2(-t); }};
}

ThresholdFunction ThresholdFunction::inverse() {
  return {"inverse", [](double t) { return 1.0 / t; }};
}

ThresholdFunction ThresholdFunction::power(double p) {
  if (!(p > 0.0)) throw ArgumentError("power threshold needs a positive exponent");
  return {"power", [p](double t) { return std::pow(t, -p); }};
}

ThresholdFunction ThresholdFunction::exponential(double rate) {
  if (!(rate > 0.0)) throw ArgumentError("exponential threshold needs a positive rate");
  return {"exponential", [rate](double t) { return std::exp(-rate * t); }};
}

void ThresholdFunction::check(double t_max) const {
  constexpr int kSamples = 256;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSamples; ++k) {
    const double t = 1.0 + (t_max - 1.0) * k / (kSamples - 1);
    const double v = h_(t);
    if (!(v > 0.0) || !std::isfinite(v))
      throw ArgumentError("threshold " + name_ + " is not positive at t = " + std::to_string(t));
    if (k > 0 && t_max > 1.0 && !(v < prev))
      throw ArgumentError("threshold " + name_ + " is not strictly decreasing near t = " +
                          std::to_string(t));
    prev = v;
  }
  if (!(h_(1e6) < 1e-3 * h_(1.0)))
    throw ArgumentError("threshold " + name_ + " does not tend to zero");
}

std::vector<QuadratureCell> web_quadrature(double t_max, int n_cells) {
  if (!(t_max >= 1.0)) throw ArgumentError("web distance needs t_max >= 1");
  if (n_cells < 1) throw ArgumentError("web distance needs at least one cell");
  std::vector<QuadratureCell> cells;
  const double w = (t_max - 1.0) / n_cells;
  if (w <= 0.0) return cells;
  // irrational offset keeps the nodes off integers and dyadic corner values
  const double jitter = w * (std::sqrt(2.0) - 1.0) / 8.0;
  for (int k = 0; k < n_cells; ++k) {
    const double a = 1.0 + k * w;
    const double b = k + 1 == n_cells ? t_max : 1.0 + (k + 1) * w;
    cells.push_back({a + 0.5 * w + jitter, std::exp(-a) - std::exp(-b)});
  }
  return cells;
}

namespace {

WebDistance web_integral(const PathCollection& G1, const PathCollection& G2,
                         const std::function<double(double)>& h, double t_max, int n_cells,
                         double resolution) {
  if (t_max > G1.horizon() + 1e-12 || t_max > G2.horizon() + 1e-12)
    throw ArgumentError("t_max beyond a collection horizon");
  if (!(resolution > 0.0)) throw ArgumentError("resolution must be positive");
  double value = 0.0;
  for (const QuadratureCell& c : web_quadrature(t_max, n_cells)) {
    const auto A = project_collection_h(G1, c.t, h(c.t));
    const auto B = project_collection_h(G2, c.t, h(c.t));
    value += c.weight * hausdorff(A, B, resolution, 1.0);
  }
  return {value, std::exp(-t_max), n_cells};
}

}  // namespace

WebDistance web_dist(const PathCollection& G1, const PathCollection& G2, double t_max,
                     int n_cells, double resolution) {
  return web_integral(G1, G2, [](double t) { return std::exp2(-t); }, t_max, n_cells,
                      resolution);
}

WebDistance web_dist_h(const PathCollection& G1, const PathCollection& G2,
                       const ThresholdFunction& h, double t_max, int n_cells,
                       double resolution) {
  h.check(std::max(t_max, 2.0));
  return web_integral(G1, G2, [&h](double t) { return h(t); }, t_max, n_cells, resolution);
}

}  // namespace stableweb
