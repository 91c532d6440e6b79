#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stableweb/aged_path.hpp"
#include "stableweb/cadlag.hpp"

namespace stableweb {

class PathCollection {
 public:
  PathCollection() = default;
  PathCollection(std::vector<AgedPath> paths, double horizon, std::string label = {});

  const std::vector<AgedPath>& paths() const { return paths_; }
  double horizon() const { return horizon_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return paths_.size(); }
  bool empty() const { return paths_.empty(); }

 private:
  std::vector<AgedPath> paths_;
  double horizon_ = 0.0;
  std::string label_;
};

// Tolerance for pointwise agreement in the maximality filter.
inline constexpr double kAgreeTol = 1e-9;

// Maximal elements of the projections at t, in collection order.
std::vector<TruncatedPath> project_collection(const PathCollection& G, double t);
std::vector<TruncatedPath> project_collection_h(const PathCollection& G, double t,
                                                double threshold);

// Drops every projection that another one extends (agrees on its window and starts
// strictly earlier) and all but the lowest-source copy of exact duplicates.
std::vector<TruncatedPath> maximal_elements(std::vector<TruncatedPath> all);

// True when x and y coincide (both coordinates) on [x.b, t]; y must cover that range.
bool agrees_on(const TruncatedPath& x, const TruncatedPath& y, double tol = kAgreeTol);

// max(d(gamma, gamma'), d(age, age')); the tolerance is the larger of the two.
PathDistance pair_dist(const TruncatedPath& x, const TruncatedPath& y, double resolution,
                       double cap = std::numeric_limits<double>::infinity());

// Two-sided Hausdorff distance under pair_dist. Empty vs empty is 0; empty vs
// nonempty is 1. With a finite cap the result is min(value, cap).
double hausdorff(const std::vector<TruncatedPath>& A, const std::vector<TruncatedPath>& B,
                 double resolution, double cap = std::numeric_limits<double>::infinity());

// Positive, strictly decreasing threshold h(t) -> 0 used in place of 2^-t.
class ThresholdFunction {
 public:
  ThresholdFunction(std::string name, std::function<double(double)> h);

  static ThresholdFunction dyadic();                 // 2^-t
  static ThresholdFunction inverse();                // 1/t
  static ThresholdFunction power(double p);          // t^-p
  static ThresholdFunction exponential(double rate); // e^{-rate t}

  double operator()(double t) const { return h_(t); }
  const std::string& name() const { return name_; }

  // Throws ArgumentError unless positive and strictly decreasing on a 256-point grid of
  // [1, t_max], and small far out.
  void check(double t_max) const;

 private:
  std::string name_;
  std::function<double(double)> h_;
};

struct WebDistance {
  double value;
  double tail_bound;  // integrand <= 1 beyond t_max
  int quad_cells;
};

WebDistance web_dist(const PathCollection& G1, const PathCollection& G2, double t_max,
                     int n_cells, double resolution);
WebDistance web_dist_h(const PathCollection& G1, const PathCollection& G2,
                       const ThresholdFunction& h, double t_max, int n_cells, double resolution);

// Quadrature nodes used by web_dist: jittered cell midpoints and exact e^{-t} cell masses.
struct QuadratureCell {
  double t;
  double weight;
};
std::vector<QuadratureCell> web_quadrature(double t_max, int n_cells);

}  // namespace stableweb
